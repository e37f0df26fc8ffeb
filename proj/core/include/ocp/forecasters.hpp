#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ocp {

struct ARParams {
    std::size_t p = 3;
    bool include_intercept = true;
};

/// Least-squares autoregression. `coefficients[i]` multiplies the value
/// lagged by i + 1. Columns found collinear with earlier ones (intercept
/// first, then lag 1..p) are dropped and carry a zero coefficient.
struct ARModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<bool> dropped;

    [[nodiscard]] std::size_t order() const noexcept { return coefficients.size(); }
};

ARModel fit_ar(std::span<const double> window, const ARParams& params = {});

/// `recent` holds exactly p values, oldest first.
double forecast_ar(const ARModel& model, std::span<const double> recent);

struct ThetaParams {
    double theta = 2.0;
    double ses_grid_step = 0.01;
};

/// Classical theta decomposition: an OLS trend line (the theta = 0 line)
/// and simple exponential smoothing of z_t = theta * y_t + (1 - theta) * trend_t.
/// The forecast recombines the two with weights 1/theta and 1 - 1/theta,
/// which are equal for theta = 2.
struct ThetaModel {
    bool fitted = false;
    double theta = 2.0;
    double trend_intercept = 0.0;
    double trend_slope = 0.0;
    std::size_t n = 0;
    double ses_alpha = 0.0;
    double ses_level = 0.0;
    double ses_sse = 0.0;
};

ThetaModel fit_theta(std::span<const double> window, const ThetaParams& params = {});
double forecast_theta(const ThetaModel& model);

/// Simple exponential smoothing with level initialised at the first value.
/// Returns the one-step-ahead forecast (the final level).
double ses_forecast(std::span<const double> values, double smoothing);

/// Uniform interface used by the online loop: a pure map from a training
/// window to a one-step-ahead forecast.
class Regressor {
public:
    virtual ~Regressor() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual double fit_forecast(std::span<const double> window) const = 0;
    /// |y_t - yhat_t| for every in-sample one-step prediction on the window.
    [[nodiscard]] virtual std::vector<double> in_sample_scores(std::span<const double> window) const = 0;
};

class ARRegressor final : public Regressor {
public:
    explicit ARRegressor(ARParams params = {});
    [[nodiscard]] std::string name() const override { return "ar"; }
    [[nodiscard]] double fit_forecast(std::span<const double> window) const override;
    [[nodiscard]] std::vector<double> in_sample_scores(std::span<const double> window) const override;
    [[nodiscard]] const ARParams& params() const noexcept { return params_; }

private:
    ARParams params_;
};

class ThetaRegressor final : public Regressor {
public:
    explicit ThetaRegressor(ThetaParams params = {});
    [[nodiscard]] std::string name() const override { return "theta"; }
    [[nodiscard]] double fit_forecast(std::span<const double> window) const override;
    [[nodiscard]] std::vector<double> in_sample_scores(std::span<const double> window) const override;
    [[nodiscard]] const ThetaParams& params() const noexcept { return params_; }

private:
    ThetaParams params_;
};

struct RegressorConfig {
    std::string name = "ar";
    ARParams ar;
    ThetaParams theta;
};

/// "ar" or "theta"; anything else throws UnknownRegressor.
std::unique_ptr<Regressor> make_regressor(const RegressorConfig& config);

}  // namespace ocp
