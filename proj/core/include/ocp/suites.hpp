#pragma once

#include "ocp/conformal.hpp"
#include "ocp/updaters.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ocp {

/// Deterministic 64-bit generator (splitmix64) with a platform-independent
/// uniform double, so seeded suites are byte-identical everywhere.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

/// Produces s_t given the threshold q_t the updater will compare it to,
/// which lets adversarial generators react to the updater.
using ScoreSource = std::function<double(std::size_t t, double q_t)>;

/// Drives an updater directly with scores (no forecaster). Records carry
/// forecast 0 and truth = score; scores may be negative.
std::vector<StepRecord> run_on_scores(const MethodConfig& config, std::size_t steps, const ScoreSource& source);

enum class ScorePattern { Uniform, Drift, Regimes, Adversarial };

std::string to_string(ScorePattern pattern);

/// Bounded scores in [lo, hi] following `pattern`. Adversarial forces a
/// miss whenever q_t is below hi and draws uniformly otherwise.
ScoreSource bounded_scores(ScorePattern pattern, double lo, double hi, std::uint64_t seed);

struct SuiteCheck {
    std::string name;
    bool held = false;
    double value = 0.0;
    double bound = 0.0;
    bool asserted = true;  ///< informational checks never fail the suite
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    std::vector<SuiteCheck> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const SuiteCheck& check(const std::string& name) const;
};

struct SuiteOptions {
    std::size_t steps = 10000;
    double alpha = 0.1;
    double bound = 1.0;  ///< b for the PID suites, B for the ECI suite
};

/// Suites: "pid-bounded" (pid-half-bis), "relevance-integral" (pid-full and pid-half,
/// integrator only), "eci-slope" (eci-mod at eta = 10.5 against eci at
/// eta = 0.005). Throws InvalidParameter for unknown names.
SuiteReport run_synthetic_suite(const std::string& name, std::uint64_t seed, const SuiteOptions& options = {});

std::span<const std::string> suite_names();

/// Throws AssertionFailed naming the first failed asserted check.
void require_passed(const SuiteReport& report);

std::string suite_report_to_json(const SuiteReport& report);

}  // namespace ocp
