#include "ocp/error.hpp"
#include "ocp/relevance.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace ocp;
using doctest::Approx;

namespace {

RelevanceParams fig_params() { return RelevanceParams{{1.0}, {4.0}, 0.1, 100, 1e-8}; }

// Random valid parameter set: l in 1..4, simplex weights, slopes in (0.1, 20).
RelevanceParams random_params(oracle::Rng& rng) {
    RelevanceParams p;
    const std::size_t l = 1 + rng.index(4);
    p.omega.assign(l, 0.0);
    p.v.assign(l, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
        p.omega[i] = rng.uniform(0.05, 1.0);
        total += p.omega[i];
        p.v[i] = rng.uniform(0.1, 20.0);
    }
    for (double& w : p.omega) w /= total;
    // renormalise the last weight so the sum is 1 to rounding
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < l; ++i) head += p.omega[i];
    p.omega.back() = 1.0 - head;
    p.alpha = rng.uniform(0.01, 0.5);
    return p;
}

ErrorCode code_of(const RelevanceParams& p) {
    try {
        validate(p);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::AssertionFailed;
}

}  // namespace

TEST_CASE("validate") {
    CHECK_NOTHROW(validate(fig_params()));
    CHECK_NOTHROW(validate(RelevanceParams{{0.3, 0.7}, {1.0, 10.0}, 0.1, 100, 1e-8}));
    CHECK(code_of(RelevanceParams{{0.5, 0.6}, {1.0, 1.0}, 0.1, 100, 1e-8}) == ErrorCode::WeightsNotSimplex);
    CHECK(code_of(RelevanceParams{{1.0}, {0.0}, 0.1, 100, 1e-8}) == ErrorCode::NonPositiveSlope);
    CHECK(code_of(RelevanceParams{{1.0}, {-2.0}, 0.1, 100, 1e-8}) == ErrorCode::NonPositiveSlope);
    CHECK(code_of(RelevanceParams{{1.0}, {4.0}, 1.0, 100, 1e-8}) == ErrorCode::AlphaOutOfRange);
    CHECK(code_of(RelevanceParams{{1.0}, {4.0}, 0.0, 100, 1e-8}) == ErrorCode::AlphaOutOfRange);
    CHECK(code_of(RelevanceParams{{1.2, -0.2}, {4.0, 4.0}, 0.1, 100, 1e-8}) == ErrorCode::WeightsNotSimplex);
}

TEST_CASE("scale estimator") {
    ScaleEstimator est(100);
    CHECK(est.mu() == 0.0);
    CHECK(effective_mu(fig_params(), est.mu()) == 1e-8);
    for (double g : {2.0, -1.0, 3.0}) est = mu_update(est, g);
    CHECK(est.mu() == Approx(0.04).epsilon(1e-15));

    ScaleEstimator full(100);
    for (int i = 0; i < 150; ++i) full.push(1.0);
    CHECK(full.size() == 100);
    CHECK(full.mu() == 1.0);

    ScaleEstimator abs_mode(4, MuMode::MeanAbs);
    for (double g : {1.0, -1.0, 1.0, -1.0}) abs_mode.push(g);
    CHECK(abs_mode.mu() == 1.0);
    ScaleEstimator sum_mode(4);
    for (double g : {1.0, -1.0, 1.0, -1.0}) sum_mode.push(g);
    CHECK(sum_mode.mu() == 0.0);
}

TEST_CASE("property: the running sum stays equal to a fresh sum of the window") {
    oracle::Rng rng(8);
    ScaleEstimator est(37);
    std::deque<double> mirror;
    for (int i = 0; i < 5000; ++i) {
        const double g = rng.uniform(-1e3, 1e3) * (i % 7 == 0 ? 1e4 : 1.0);
        est.push(g);
        mirror.push_back(g);
        if (mirror.size() > 37) mirror.pop_front();
        double s = 0.0;
        for (double x : mirror) s += x;
        CHECK(est.running_sum() == Approx(s).epsilon(1e-9).scale(1e4));
        CHECK(est.size() <= 37);
    }
}

TEST_CASE("eval_f reference values") {
    const auto p = fig_params();
    CHECK(std::abs(eval_f(p, 20.0, 0.0) - 0.1) < 1e-12);
    CHECK(eval_f(p, 20.0, 20.0) == Approx(oracle::kF_at_20).epsilon(1e-14));
    CHECK(eval_f(p, 20.0, 1e6) == Approx(1.0));
    CHECK(eval_f(p, 20.0, -1e6) == Approx(0.0));
    CHECK(eval_f(p, 20.0, -1e6) >= 0.0);
}

TEST_CASE("grad_f reference values") {
    const auto p = fig_params();
    CHECK(std::abs(grad_f(p, 20.0, 0.0) - oracle::kGrad_at_0) < 1e-12);
    CHECK(grad_f(p, 20.0, 20.0) == Approx(oracle::kGrad_at_20).epsilon(1e-13));
    CHECK(grad_f(p, 20.0, 1e5) < 1e-12);
    CHECK(grad_f(p, 20.0, -1e5) < 1e-12);
}

TEST_CASE("property: eval_f agrees with an extended-precision evaluation") {
    oracle::Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const auto p = random_params(rng);
        const double mu = std::pow(10.0, rng.uniform(-3, 3));
        const double x = rng.uniform(-10.0, 10.0) * mu;
        CHECK(eval_f(p, mu, x) == Approx(oracle::relevance_f(p.omega, p.v, p.alpha, mu, x)).epsilon(1e-13));
    }
}

TEST_CASE("property: static state, range, monotonicity, scale invariance") {
    oracle::Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_params(rng);
        const double mu = std::pow(10.0, rng.uniform(-2, 2));
        CHECK(std::abs(eval_f(p, mu, 0.0) - p.alpha) <= 1e-12);
        const double vmax = *std::max_element(p.v.begin(), p.v.end());
        const double span = 25.0 * mu / vmax;
        double prev = -1.0;
        for (int k = 0; k < 1000; ++k) {
            const double x = -span + 2.0 * span * k / 999.0;
            const double f = eval_f(p, mu, x);
            CHECK(f > 0.0);
            CHECK(f < 1.0);
            CHECK(f > prev);
            prev = f;
            CHECK(grad_f(p, mu, x) <= slope_bound(p, mu) * (1.0 + 1e-12));
            CHECK(grad_f(p, mu, x) > 0.0);
        }
        for (double k : {0.01, 1.0, 100.0}) {
            const double x = rng.uniform(-span, span);
            CHECK(std::abs(eval_f(p, k * mu, k * x) - eval_f(p, mu, x)) <= 1e-12);
        }
    }
}

TEST_CASE("property: equal slopes collapse to a single sigmoid") {
    oracle::Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const double v = rng.uniform(0.1, 20.0);
        const double w = rng.uniform(0.01, 0.99);
        const double alpha = rng.uniform(0.01, 0.5);
        const RelevanceParams two{{w, 1.0 - w}, {v, v}, alpha, 100, 1e-8};
        const RelevanceParams one{{1.0}, {v}, alpha, 100, 1e-8};
        const double mu = rng.uniform(0.1, 50.0);
        const double x = rng.uniform(-20.0, 20.0) * mu / v;
        CHECK(std::abs(eval_f(two, mu, x) - eval_f(one, mu, x)) <= 1e-12);
    }
}

TEST_CASE("property: grad_f matches central differences") {
    std::vector<RelevanceParams> sets{
        fig_params(),
        {{0.3, 0.7}, {1.0, 10.0}, 0.1, 100, 1e-8},
        {{1.0}, {0.5}, 0.05, 100, 1e-8},
        {{0.2, 0.3, 0.5}, {2.0, 5.0, 12.0}, 0.2, 100, 1e-8},
        {{0.5, 0.5}, {0.01, 3.0}, 0.1, 100, 1e-8},
    };
    for (const auto& p : sets) {
        const double mu = &p == &sets[0] ? 20.0 : 3.0;
        const double vmax = *std::max_element(p.v.begin(), p.v.end());
        const double span = 8.0 * mu / vmax;
        for (int k = 0; k < 100; ++k) {
            const double x = -span + 2.0 * span * (k + 0.5) / 100.0;
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            const double fd = (eval_f(p, mu, x + h) - eval_f(p, mu, x - h)) / (2.0 * h);
            const double g = grad_f(p, mu, x);
            CHECK(std::abs(fd - g) / g <= 1e-6);
        }
    }
}

TEST_CASE("x grad f is bounded and peaks away from zero") {
    const auto p = RelevanceParams{{1.0}, {1.0}, 0.1, 100, 1e-8};
    const double u = xgrad_sup(p);
    CHECK(u == Approx(0.642396).epsilon(1e-5));
    // scale free: the sup does not depend on mu
    double best = 0.0, arg = 0.0;
    for (int k = -20000; k <= 20000; ++k) {
        const double x = k * 3.5e-3;
        const double val = std::abs(x * grad_f(p, 7.0, x));
        if (val > best) {
            best = val;
            arg = x;
        }
    }
    CHECK(best == Approx(u).epsilon(1e-6));
    CHECK(std::abs(arg) > 1.0);
}
