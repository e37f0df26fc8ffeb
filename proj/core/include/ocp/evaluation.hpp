#pragma once

#include "ocp/conformal.hpp"
#include "ocp/updaters.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocp {

struct BoundCheck {
    std::string name;
    bool held = false;
    double margin = 0.0;
};

struct RunReport {
    std::string method;
    std::string dataset;
    std::string regressor;
    double coverage = 0.0;
    double avg_width = 0.0;
    double median_width = 0.0;
    std::size_t n_steps = 0;
    std::string config_json = "{}";  ///< full parameter echo, JSON object text
    std::vector<BoundCheck> bound_checks;
};

/// Coverage, mean and median of max(0, 2 q_t) over every step, misses
/// included. Throws EmptyTrace.
RunReport summarize(std::span<const StepRecord> trace);

/// |(1/T) sum 1{miss} - alpha|.
double longrun_coverage_gap(std::span<const StepRecord> trace, double alpha);

/// Error terms e_i a method fed into its integrator: the miss indicator or
/// the recorded relevance value.
std::vector<double> error_terms(std::span<const StepRecord> trace, IntegralSource source);

struct InductionCheck {
    bool held = true;
    double worst_margin = 0.0;  ///< min over T of c h(T) + 1 - |E_T|
    std::size_t worst_step = 0;
    std::optional<std::size_t> first_violation;
};

using Envelope = std::function<double(std::size_t)>;

/// Verifies |sum_{i<=T} (e_i - alpha)| <= c h(T) + 1 at every prefix T.
InductionCheck check_induction_bound(std::span<const double> errors, double c, const Envelope& h, double alpha);

/// Long-run coverage bound (c h(T) + 2) / T implied by the induction bound.
double coverage_gap_bound(std::size_t T, double c, const Envelope& h);

/// Slope ceiling min(eta, N^2) / (2 N^2 [B + eta (1 - alpha + U)]) with
/// N = ceil(1 / alpha), below which the modified ECI update keeps
/// long-run coverage (together with eta > N B).
double eci_slope_ceiling(double eta, double B, double alpha, double U);

/// ceil(1 / alpha).
std::size_t miss_spacing(double alpha);

/// Smallest T' such that |sum (1{miss} - alpha)| <= |sum (f - alpha)| + tol
/// for every observed T >= T'. nullopt if the last prefix already fails or
/// the trace carries no relevance values. Throws EmptyTrace.
std::optional<std::size_t> relevance_dominance_start(std::span<const StepRecord> trace, double alpha,
                                                     double tol = 1e-9);

/// Sort-and-interpolate quantile; reference for RollingQuantile.
double brute_quantile(std::vector<double> scores, double level);

/// Midpoint of the two central order statistics for even counts.
double median(std::vector<double> values);

/// Report as a JSON object; keys are emitted in sorted order.
std::string report_to_json(const RunReport& report);

/// Summary table: rows coverage / average width / median width,
/// one column per report ("<regressor> <method>").
std::string format_table(const std::string& dataset, std::span<const RunReport> reports);

}  // namespace ocp
