#include "ocp/relevance.hpp"

#include "ocp/error.hpp"

#include <algorithm>
#include <cmath>

namespace ocp {

namespace {

constexpr double kSimplexTol = 1e-12;

double logit_offset(double alpha) { return -std::log((1.0 - alpha) / alpha); }

}  // namespace

const RelevanceParams& validate(const RelevanceParams& params) {
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
    }
    if (params.omega.empty()) throw Error(ErrorCode::WeightsNotSimplex, "omega must have at least one weight");
    if (params.omega.size() != params.v.size()) {
        throw Error(ErrorCode::InvalidParameter, "omega and v must have the same length");
    }
    double total = 0.0;
    for (double w : params.omega) {
        if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::WeightsNotSimplex, "omega weights must be > 0");
        total += w;
    }
    if (std::abs(total - 1.0) > kSimplexTol) {
        throw Error(ErrorCode::WeightsNotSimplex, "omega weights sum to " + std::to_string(total) + ", not 1");
    }
    for (double slope : params.v) {
        if (!(slope > 0.0) || !std::isfinite(slope)) throw Error(ErrorCode::NonPositiveSlope, "v entries must be > 0");
    }
    if (params.window == 0) throw Error(ErrorCode::InvalidParameter, "T_w must be positive");
    if (!(params.mu_floor > 0.0)) throw Error(ErrorCode::InvalidParameter, "mu_floor must be > 0");
    return params;
}

std::string to_string(MuMode mode) { return mode == MuMode::AbsSum ? "abs-sum" : "mean-abs"; }

MuMode mu_mode_from_string(const std::string& name) {
    if (name == "abs-sum") return MuMode::AbsSum;
    if (name == "mean-abs") return MuMode::MeanAbs;
    throw Error(ErrorCode::InvalidParameter, "unknown mu mode '" + name + "'");
}

ScaleEstimator::ScaleEstimator(std::size_t window, MuMode mode) : window_(window), mode_(mode) {
    if (window_ == 0) throw Error(ErrorCode::InvalidParameter, "T_w must be positive");
}

void ScaleEstimator::push(double gap) {
    const double term = mode_ == MuMode::AbsSum ? gap : std::abs(gap);
    gaps_.push_back(term);
    sum_ += term;
    if (gaps_.size() > window_) {
        sum_ -= gaps_.front();
        gaps_.pop_front();
    }
    // Exact re-summation bounds floating drift of the running sum.
    if (++pushes_since_resum_ >= window_) {
        sum_ = 0.0;
        for (double g : gaps_) sum_ += g;
        pushes_since_resum_ = 0;
    }
}

double ScaleEstimator::mu() const noexcept { return std::abs(sum_) / static_cast<double>(window_); }

ScaleEstimator mu_update(ScaleEstimator estimator, double gap) {
    estimator.push(gap);
    return estimator;
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double sigmoid_slope(double x) noexcept {
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

double effective_mu(const RelevanceParams& params, double mu) noexcept { return std::max(mu, params.mu_floor); }

double eval_f(const RelevanceParams& params, double mu, double x) {
    const double m = effective_mu(params, mu);
    const double b = logit_offset(params.alpha);
    double f = 0.0;
    for (std::size_t i = 0; i < params.omega.size(); ++i) f += params.omega[i] * sigmoid(params.v[i] / m * x + b);
    return f;
}

double grad_f(const RelevanceParams& params, double mu, double x) {
    const double m = effective_mu(params, mu);
    const double b = logit_offset(params.alpha);
    double g = 0.0;
    for (std::size_t i = 0; i < params.omega.size(); ++i) {
        const double a = params.v[i] / m;
        g += params.omega[i] * a * sigmoid_slope(a * x + b);
    }
    return g;
}

double slope_bound(const RelevanceParams& params, double mu) {
    const double m = effective_mu(params, mu);
    double bound = 0.0;
    for (std::size_t i = 0; i < params.omega.size(); ++i) bound += params.omega[i] * params.v[i];
    return bound / (4.0 * m);
}

double xgrad_sup(const RelevanceParams& params) {
    const double mu = effective_mu(params, 1.0);
    const double min_v = *std::min_element(params.v.begin(), params.v.end());
    // Beyond |v_i x / mu| = 60 every term is below 1e-20.
    const double half_span = 60.0 * mu / min_v;
    constexpr int kPoints = 400000;
    double sup = 0.0;
    for (int k = 0; k <= kPoints; ++k) {
        const double x = -half_span + 2.0 * half_span * k / kPoints;
        sup = std::max(sup, std::abs(x * grad_f(params, mu, x)));
    }
    return sup;
}

}  // namespace ocp
