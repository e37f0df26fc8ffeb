#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace ocp {

/// One member of the sigmoid-mixture relevance family
///
///     f(x) = sum_i omega_i * sigma((v_i / mu) * x - ln((1 - alpha) / alpha))
///
/// where x = s_t - q_t is the signed distance from the truth to the nearer
/// interval bound and mu is a windowed scale of past gaps. f(0) = alpha,
/// f is strictly increasing with range (0, 1), and f(k mu, k x) = f(mu, x).
struct RelevanceParams {
    std::vector<double> omega{1.0};
    std::vector<double> v{4.0};
    double alpha = 0.1;
    std::size_t window = 100;  ///< T_w
    double mu_floor = 1e-8;
};

/// Throws WeightsNotSimplex, NonPositiveSlope or AlphaOutOfRange;
/// returns the params unchanged otherwise.
const RelevanceParams& validate(const RelevanceParams& params);

/// Optional per-step override of (omega, v). Not used by any shipped config.
using RelevanceSchedule = std::function<RelevanceParams(std::size_t t)>;

enum class MuMode {
    AbsSum,   ///< |sum of window| / T_w
    MeanAbs,  ///< sum of |gap| / T_w (avoids cancellation on oscillating gaps)
};

std::string to_string(MuMode mode);
MuMode mu_mode_from_string(const std::string& name);

/// FIFO of the last T_w gaps. mu() divides by T_w even while the window is
/// still filling.
class ScaleEstimator {
public:
    explicit ScaleEstimator(std::size_t window = 100, MuMode mode = MuMode::AbsSum);

    void push(double gap);

    [[nodiscard]] double mu() const noexcept;
    [[nodiscard]] double running_sum() const noexcept { return sum_; }
    [[nodiscard]] std::size_t size() const noexcept { return gaps_.size(); }
    [[nodiscard]] std::size_t window() const noexcept { return window_; }
    [[nodiscard]] MuMode mode() const noexcept { return mode_; }
    [[nodiscard]] const std::deque<double>& gaps() const noexcept { return gaps_; }

private:
    std::size_t window_;
    MuMode mode_;
    std::deque<double> gaps_;
    double sum_ = 0.0;
    std::size_t pushes_since_resum_ = 0;
};

ScaleEstimator mu_update(ScaleEstimator estimator, double gap);

/// Numerically stable logistic function.
double sigmoid(double x) noexcept;
/// sigmoid'(x), without the cancellation in sigmoid(x) * (1 - sigmoid(x)).
double sigmoid_slope(double x) noexcept;

double eval_f(const RelevanceParams& params, double mu, double x);

/// Derivative of eval_f in x. Always positive and at most slope_bound().
double grad_f(const RelevanceParams& params, double mu, double x);

/// sum_i omega_i v_i / (4 mu), the supremum of grad_f.
double slope_bound(const RelevanceParams& params, double mu);

/// sup_x |x * grad_f(x)|. Independent of mu (x grad_f is scale free), so it
/// is evaluated once on a dense grid.
double xgrad_sup(const RelevanceParams& params);

/// mu clamped below by params.mu_floor.
double effective_mu(const RelevanceParams& params, double mu) noexcept;

}  // namespace ocp
