#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ocp {

/// Symmetric interval [center - radius, center + radius]. A negative
/// threshold produces an empty interval (radius 0, `empty` set) that
/// covers nothing.
struct PredictionInterval {
    double center = 0.0;
    double radius = 0.0;
    bool empty = false;

    [[nodiscard]] double lower() const noexcept { return center - radius; }
    [[nodiscard]] double upper() const noexcept { return center + radius; }
    [[nodiscard]] double width() const noexcept { return empty ? 0.0 : 2.0 * radius; }
    [[nodiscard]] bool contains(double y) const noexcept { return !empty && lower() <= y && y <= upper(); }
};

struct StepEvaluation {
    bool miss = false;
    double score = 0.0;
    double gap = 0.0;
};

/// One online step. `threshold_before` is the raw q_t the interval was
/// built from; `gap` is score - threshold_before.
struct StepRecord {
    std::size_t t = 0;
    double forecast = 0.0;
    double truth = 0.0;
    double score = 0.0;
    double threshold_before = 0.0;
    bool miss = false;
    double gap = 0.0;
    std::optional<double> relevance;
    double threshold_after = 0.0;

    [[nodiscard]] double width() const noexcept { return threshold_before > 0.0 ? 2.0 * threshold_before : 0.0; }
};

/// Absolute residual |truth - forecast|.
double score(double truth, double forecast) noexcept;

PredictionInterval build_interval(double forecast, double q) noexcept;

/// miss = score > q_raw (ties are covered); gap uses the unclipped q_raw.
StepEvaluation evaluate_step(const PredictionInterval& interval, double truth, double q_raw) noexcept;

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

inline constexpr const char* kTraceHeader = "t,forecast,truth,score,q_before,miss,gap,relevance,q_after";

/// CSV columns: t, forecast, truth, score, q_before, miss, gap, relevance,
/// q_after. `relevance` is blank for updaters that do not compute it.
void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace);

}  // namespace ocp
