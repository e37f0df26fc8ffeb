#include "ocp/error.hpp"
#include "ocp/evaluation.hpp"
#include "ocp/suites.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace ocp;
using doctest::Approx;

namespace {

std::vector<StepRecord> flat_trace(std::size_t n, double q, std::size_t misses) {
    std::vector<StepRecord> trace(n);
    for (std::size_t i = 0; i < n; ++i) {
        trace[i].t = i + 1;
        trace[i].threshold_before = q;
        trace[i].miss = i < misses;
    }
    return trace;
}

const Envelope kH = [](std::size_t t) { return saturation_envelope(t, 1.0); };

}  // namespace

TEST_CASE("summarize") {
    const auto r = summarize(flat_trace(10, 2.0, 1));
    CHECK(r.coverage == Approx(0.9).epsilon(1e-15));
    CHECK(r.avg_width == 4.0);
    CHECK(r.median_width == 4.0);
    CHECK(r.n_steps == 10);
    CHECK(summarize(flat_trace(5, 1.0, 5)).coverage == 0.0);
    CHECK_THROWS_AS(summarize(std::vector<StepRecord>{}), Error);

    auto neg = flat_trace(4, -1.0, 0);
    neg[0].threshold_before = 3.0;
    const auto rn = summarize(neg);
    CHECK(rn.avg_width == 1.5);
    CHECK(rn.median_width == 0.0);
}

TEST_CASE("property: summarize is a pure fold") {
    oracle::Rng rng(3);
    std::vector<StepRecord> trace(501);
    for (auto& r : trace) {
        r.threshold_before = rng.uniform(-1.0, 5.0);
        r.miss = rng.uniform() < 0.2;
    }
    const auto a = summarize(trace);
    const auto b = summarize(trace);
    CHECK(a.coverage == b.coverage);
    CHECK(a.avg_width == b.avg_width);
    CHECK(a.median_width == b.median_width);
    std::vector<double> w;
    std::size_t misses = 0;
    for (const auto& r : trace) {
        w.push_back(2.0 * std::max(0.0, r.threshold_before));
        misses += r.miss;
    }
    std::sort(w.begin(), w.end());
    CHECK(a.median_width == w[250]);
    CHECK(a.coverage == 1.0 - static_cast<double>(misses) / 501.0);
}

TEST_CASE("longrun_coverage_gap") {
    CHECK(longrun_coverage_gap(flat_trace(100, 1.0, 10), 0.1) == Approx(0.0).epsilon(1e-15));
    CHECK(longrun_coverage_gap(flat_trace(100, 1.0, 0), 0.1) == Approx(0.1).epsilon(1e-15));
}

TEST_CASE("induction bound checker") {
    SUBCASE("zero sum holds with margin c h(T) + 1") {
        const std::vector<double> e(50, 0.1);
        const auto r = check_induction_bound(e, 1.0, kH, 0.1);
        CHECK(r.held);
        CHECK(r.worst_margin == Approx(kH(1) + 1.0).epsilon(1e-12));
    }
    SUBCASE("constant error terms without saturation break the bound") {
        const std::vector<double> e(100, 1.0);
        const auto r = check_induction_bound(e, 1.0, kH, 0.1);
        CHECK_FALSE(r.held);
        REQUIRE(r.first_violation.has_value());
        CHECK(*r.first_violation == oracle::kCorruptFirstViolation);
        // the analytic crossing point T ~ (c h(T) + 1) / (1 - alpha)
        const auto T = static_cast<double>(*r.first_violation);
        CHECK(0.9 * T > kH(*r.first_violation) + 1.0);
        CHECK(0.9 * (T - 1) <= kH(*r.first_violation - 1) + 1.0);
    }
    SUBCASE("adversarial scores under the pure integral update hold") {
        MethodConfig c;
        c.method = Method::Pid;
        c.pure_integral = true;
        c.saturation = SaturationConfig{1.0, 1.0, 10.0};
        const auto trace = run_on_scores(c, 5000, bounded_scores(ScorePattern::Adversarial, -0.5, 0.5, 1));
        std::size_t flips = 0;
        for (std::size_t i = 1; i < trace.size(); ++i) flips += trace[i].miss != trace[i - 1].miss;
        CHECK(flips > 100);
        const auto r = check_induction_bound(error_terms(trace, IntegralSource::Indicator), 1.0, kH, 0.1);
        CHECK(r.held);
    }
}

TEST_CASE("coverage bound helpers") {
    CHECK(coverage_gap_bound(10000, 1.0, kH) == Approx((kH(10000) + 2.0) / 10000.0).epsilon(1e-15));
    CHECK(miss_spacing(0.1) == 10);
    CHECK(miss_spacing(0.3) == 4);
    const double ceiling = eci_slope_ceiling(10.5, 1.0, 0.1, 0.642396);
    CHECK(ceiling == Approx(10.5 / (200.0 * (1.0 + 10.5 * (0.9 + 0.642396)))).epsilon(1e-12));
    CHECK(eci_slope_ceiling(1000.0, 1.0, 0.1, 0.5) == Approx(100.0 / (200.0 * (1.0 + 1000.0 * 1.4))).epsilon(1e-12));
}

TEST_CASE("relevance dominance scan") {
    MethodConfig c;
    c.method = Method::PidHalfBis;
    c.relevance = RelevanceParams{{1.0}, {1e9}, 0.1, 100, 1.0};
    const auto trace = run_on_scores(c, 2000, bounded_scores(ScorePattern::Uniform, 0.0, 1.0, 3));
    const auto from = relevance_dominance_start(trace, 0.1, 1e-6);
    REQUIRE(from.has_value());
    CHECK(*from == 1);

    CHECK_THROWS_AS(relevance_dominance_start(std::vector<StepRecord>{}, 0.1), Error);
    auto no_rel = flat_trace(5, 1.0, 1);
    CHECK_FALSE(relevance_dominance_start(no_rel, 0.1).has_value());
}

TEST_CASE("brute_quantile") {
    CHECK(brute_quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.5) == 5.5);
    CHECK(brute_quantile({7}, 0.3) == 7.0);
    CHECK(brute_quantile({7}, 0.99) == 7.0);
    oracle::Rng rng(1000);
    std::vector<double> u(1000);
    for (double& x : u) x = rng.uniform();
    CHECK(std::abs(brute_quantile(u, 0.9) - 0.9) <= 0.02);
    CHECK_THROWS_AS(brute_quantile({}, 0.5), Error);
}

TEST_CASE("median") {
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("report json and table") {
    RunReport r;
    r.method = "pid";
    r.dataset = "google";
    r.regressor = "ar";
    r.coverage = 0.91;
    r.avg_width = 43.75;
    r.median_width = 39.44;
    r.n_steps = 1000;
    r.config_json = R"({"alpha": 0.1})";
    r.bound_checks = {{"coverage_gap_bound", true, 0.01}};
    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j["coverage"] == 0.91);
    CHECK(j["config"]["alpha"] == 0.1);
    CHECK(j["bound_checks"][0]["name"] == "coverage_gap_bound");

    std::vector<RunReport> four(4, r);
    four[1].method = "pid-half-bis";
    four[2].regressor = "theta";
    four[3].regressor = "theta";
    four[3].method = "pid-half-bis";
    const auto table = format_table("google", four);
    CHECK(table.find("ar pid") != std::string::npos);
    CHECK(table.find("theta pid-half-bis") != std::string::npos);
    CHECK(table.find("43.75") != std::string::npos);
    std::size_t lines = std::count(table.begin(), table.end(), '\n');
    CHECK(lines == 6);  // title, header, rule, three metric rows
    const auto coverage_line = table.substr(table.find("Coverage"));
    CHECK(std::count(coverage_line.begin(), coverage_line.begin() + coverage_line.find('\n'), '|') == 4);
}
