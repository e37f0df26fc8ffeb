#include "ocp/experiment.hpp"
#include "ocp/forecasters.hpp"
#include "ocp/relevance.hpp"
#include "ocp/updaters.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y{100.0};
    while (y.size() < n) y.push_back(y.back() + normal(rng));
    return y;
}

void BM_UpdaterStep(benchmark::State& state) {
    ocp::MethodConfig c;
    c.method = static_cast<ocp::Method>(state.range(0));
    c.calibration_scores = std::vector<double>(365, 1.0);
    auto up = ocp::make_updater(c);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> score(0.0, 2.0);
    for (auto _ : state) {
        const double s = score(rng);
        const double q = up->threshold();
        benchmark::DoNotOptimize(up->update({s, s - q, s > q}));
    }
    state.SetLabel(ocp::to_string(c.method));
}
BENCHMARK(BM_UpdaterStep)->DenseRange(0, 7);

void BM_FitAr(benchmark::State& state) {
    const auto y = random_walk(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(ocp::fit_ar(y));
}
BENCHMARK(BM_FitAr)->Arg(365)->Arg(2000);

void BM_FitTheta(benchmark::State& state) {
    const auto y = random_walk(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(ocp::forecast_theta(ocp::fit_theta(y)));
}
BENCHMARK(BM_FitTheta)->Arg(365)->Arg(2000);

void BM_EvalF(benchmark::State& state) {
    const ocp::RelevanceParams p{{0.3, 0.7}, {1.0, 10.0}, 0.1, 100, 1e-8};
    double x = -5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ocp::eval_f(p, 3.0, x));
        x = x > 5.0 ? -5.0 : x + 1e-3;
    }
}
BENCHMARK(BM_EvalF);

void BM_FullRun(benchmark::State& state) {
    const ocp::UnivariateSeries s("rw", random_walk(365 + 1000, 4));
    ocp::RunConfig c;
    c.method = "pid-half-bis";
    c.regressor.name = state.range(0) == 0 ? "ar" : "theta";
    for (auto _ : state) benchmark::DoNotOptimize(ocp::run_experiment(c, s));
    state.SetLabel(c.regressor.name);
}
BENCHMARK(BM_FullRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
