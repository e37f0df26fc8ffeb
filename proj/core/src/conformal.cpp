#include "ocp/conformal.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace ocp {

double score(double truth, double forecast) noexcept { return std::abs(truth - forecast); }

PredictionInterval build_interval(double forecast, double q) noexcept {
    if (q < 0.0) return {forecast, 0.0, true};
    return {forecast, q, false};
}

StepEvaluation evaluate_step(const PredictionInterval& interval, double truth, double q_raw) noexcept {
    const double s = score(truth, interval.center);
    return {s > q_raw, s, s - q_raw};
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return {buf.data(), ptr};
}

void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace) {
    out << kTraceHeader << '\n';
    for (const auto& r : trace) {
        out << r.t << ',' << format_double(r.forecast) << ',' << format_double(r.truth) << ','
            << format_double(r.score) << ',' << format_double(r.threshold_before) << ',' << (r.miss ? 1 : 0) << ','
            << format_double(r.gap) << ',';
        if (r.relevance) out << format_double(*r.relevance);
        out << ',' << format_double(r.threshold_after) << '\n';
    }
}

}  // namespace ocp
