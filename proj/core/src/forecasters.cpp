#include "ocp/forecasters.hpp"

#include "ocp/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace ocp {

namespace {

constexpr double kCollinearTol = 1e-9;

// Column j of the AR design: 0 is the intercept (if present), otherwise lag.
Eigen::MatrixXd ar_design(std::span<const double> window, std::size_t p, bool intercept) {
    const auto rows = static_cast<Eigen::Index>(window.size() - p);
    const auto cols = static_cast<Eigen::Index>(p + (intercept ? 1 : 0));
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = static_cast<std::size_t>(r) + p;
        Eigen::Index c = 0;
        if (intercept) x(r, c++) = 1.0;
        for (std::size_t lag = 1; lag <= p; ++lag) x(r, c++) = window[t - lag];
    }
    return x;
}

// Greedy left-to-right selection of linearly independent columns.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x) {
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        Eigen::VectorXd r = x.col(j);
        const double norm = r.norm();
        if (norm == 0.0) continue;
        for (const auto& q : basis) r -= q.dot(r) * q;
        for (const auto& q : basis) r -= q.dot(r) * q;  // re-orthogonalise
        const double residual = r.norm();
        if (residual <= kCollinearTol * norm) continue;
        basis.emplace_back(r / residual);
        kept.push_back(j);
    }
    return kept;
}

struct TrendLine {
    double intercept;
    double slope;
};

TrendLine fit_trend(std::span<const double> y) {
    const double n = static_cast<double>(y.size());
    const double t_mean = (n - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double dt = static_cast<double>(t) - t_mean;
        sxy += dt * (y[t] - y_mean);
        sxx += dt * dt;
    }
    const double slope = sxy / sxx;
    return {y_mean - slope * t_mean, slope};
}

std::vector<double> theta_line(std::span<const double> y, double theta, const TrendLine& trend) {
    std::vector<double> z(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        z[t] = theta * y[t] + (1.0 - theta) * (trend.intercept + trend.slope * static_cast<double>(t));
    }
    return z;
}

double ses_sse(std::span<const double> z, double smoothing) {
    double level = z[0];
    double sse = 0.0;
    for (std::size_t t = 1; t < z.size(); ++t) {
        const double err = z[t] - level;
        sse += err * err;
        level += smoothing * err;
    }
    return sse;
}

void check_theta_params(const ThetaParams& params) {
    if (!(params.theta >= 1.0)) throw Error(ErrorCode::InvalidParameter, "theta must be >= 1");
    if (!(params.ses_grid_step > 0.0 && params.ses_grid_step < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "ses_grid_step must lie in (0, 1)");
    }
}

}  // namespace

ARModel fit_ar(std::span<const double> window, const ARParams& params) {
    if (params.p < 1) throw Error(ErrorCode::InvalidParameter, "AR order must be >= 1");
    if (window.size() <= params.p + 1) {
        throw Error(ErrorCode::WindowTooShort, "AR(" + std::to_string(params.p) + ") needs more than " +
                                                   std::to_string(params.p + 1) + " points");
    }
    const Eigen::MatrixXd x = ar_design(window, params.p, params.include_intercept);
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) y(r) = window[static_cast<std::size_t>(r) + params.p];

    const auto kept = independent_columns(x);
    if (kept.empty()) throw Error(ErrorCode::RankDeficient, "no usable regressor column in window");

    Eigen::MatrixXd reduced(x.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) reduced.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);
    const Eigen::VectorXd beta = reduced.colPivHouseholderQr().solve(y);

    ARModel model;
    model.coefficients.assign(params.p, 0.0);
    model.dropped.assign(params.p, true);
    const Eigen::Index lag_offset = params.include_intercept ? 1 : 0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const Eigen::Index col = kept[k];
        if (params.include_intercept && col == 0) {
            model.intercept = beta(static_cast<Eigen::Index>(k));
        } else {
            const auto lag = static_cast<std::size_t>(col - lag_offset);
            model.coefficients[lag] = beta(static_cast<Eigen::Index>(k));
            model.dropped[lag] = false;
        }
    }
    return model;
}

double forecast_ar(const ARModel& model, std::span<const double> recent) {
    const std::size_t p = model.order();
    if (recent.size() != p) {
        throw Error(ErrorCode::WrongLagCount,
                    "expected " + std::to_string(p) + " lagged values, got " + std::to_string(recent.size()));
    }
    double value = model.intercept;
    for (std::size_t i = 0; i < p; ++i) value += model.coefficients[i] * recent[p - 1 - i];
    return value;
}

double ses_forecast(std::span<const double> values, double smoothing) {
    double level = values[0];
    for (std::size_t t = 1; t < values.size(); ++t) level += smoothing * (values[t] - level);
    return level;
}

ThetaModel fit_theta(std::span<const double> window, const ThetaParams& params) {
    check_theta_params(params);
    if (window.size() < 4) throw Error(ErrorCode::WindowTooShort, "theta needs at least 4 points");

    const TrendLine trend = fit_trend(window);
    const auto z = theta_line(window, params.theta, trend);

    double best_alpha = params.ses_grid_step;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1;; ++k) {
        const double a = static_cast<double>(k) * params.ses_grid_step;
        if (a >= 1.0 - 1e-12) break;
        const double sse = ses_sse(z, a);
        if (sse < best_sse) {
            best_sse = sse;
            best_alpha = a;
        }
    }

    ThetaModel model;
    model.fitted = true;
    model.theta = params.theta;
    model.trend_intercept = trend.intercept;
    model.trend_slope = trend.slope;
    model.n = window.size();
    model.ses_alpha = best_alpha;
    model.ses_level = ses_forecast(z, best_alpha);
    model.ses_sse = best_sse;
    return model;
}

double forecast_theta(const ThetaModel& model) {
    if (!model.fitted) throw Error(ErrorCode::UnfittedModel, "theta model used before fit");
    const double trend_next = model.trend_intercept + model.trend_slope * static_cast<double>(model.n);
    const double w = 1.0 / model.theta;
    return w * model.ses_level + (1.0 - w) * trend_next;
}

ARRegressor::ARRegressor(ARParams params) : params_(params) {
    if (params_.p < 1) throw Error(ErrorCode::InvalidParameter, "AR order must be >= 1");
}

double ARRegressor::fit_forecast(std::span<const double> window) const {
    const auto model = fit_ar(window, params_);
    return forecast_ar(model, window.last(params_.p));
}

std::vector<double> ARRegressor::in_sample_scores(std::span<const double> window) const {
    const auto model = fit_ar(window, params_);
    std::vector<double> scores;
    scores.reserve(window.size() - params_.p);
    for (std::size_t t = params_.p; t < window.size(); ++t) {
        scores.push_back(std::abs(window[t] - forecast_ar(model, window.subspan(t - params_.p, params_.p))));
    }
    return scores;
}

ThetaRegressor::ThetaRegressor(ThetaParams params) : params_(params) { check_theta_params(params_); }

double ThetaRegressor::fit_forecast(std::span<const double> window) const {
    return forecast_theta(fit_theta(window, params_));
}

std::vector<double> ThetaRegressor::in_sample_scores(std::span<const double> window) const {
    const auto model = fit_theta(window, params_);
    const TrendLine trend{model.trend_intercept, model.trend_slope};
    const auto z = theta_line(window, model.theta, trend);
    const double w = 1.0 / model.theta;
    std::vector<double> scores;
    scores.reserve(window.size() - 1);
    double level = z[0];
    for (std::size_t t = 1; t < window.size(); ++t) {
        const double trend_t = trend.intercept + trend.slope * static_cast<double>(t);
        scores.push_back(std::abs(window[t] - (w * level + (1.0 - w) * trend_t)));
        level += model.ses_alpha * (z[t] - level);
    }
    return scores;
}

std::unique_ptr<Regressor> make_regressor(const RegressorConfig& config) {
    if (config.name == "ar") return std::make_unique<ARRegressor>(config.ar);
    if (config.name == "theta") return std::make_unique<ThetaRegressor>(config.theta);
    throw Error(ErrorCode::UnknownRegressor, "unknown regressor '" + config.name + "'");
}

}  // namespace ocp
