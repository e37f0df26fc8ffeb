#include "ocp/evaluation.hpp"

#include "ocp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

namespace ocp {

namespace {

void require_nonempty(std::span<const StepRecord> trace) {
    if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no steps");
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

}  // namespace

RunReport summarize(std::span<const StepRecord> trace) {
    require_nonempty(trace);
    std::size_t misses = 0;
    double width_sum = 0.0;
    std::vector<double> widths;
    widths.reserve(trace.size());
    for (const auto& r : trace) {
        misses += r.miss ? 1 : 0;
        widths.push_back(r.width());
        width_sum += widths.back();
    }
    RunReport report;
    report.n_steps = trace.size();
    report.coverage = 1.0 - static_cast<double>(misses) / static_cast<double>(trace.size());
    report.avg_width = width_sum / static_cast<double>(trace.size());
    report.median_width = median(std::move(widths));
    return report;
}

double longrun_coverage_gap(std::span<const StepRecord> trace, double alpha) {
    require_nonempty(trace);
    std::size_t misses = 0;
    for (const auto& r : trace) misses += r.miss ? 1 : 0;
    return std::abs(static_cast<double>(misses) / static_cast<double>(trace.size()) - alpha);
}

std::vector<double> error_terms(std::span<const StepRecord> trace, IntegralSource source) {
    std::vector<double> e;
    e.reserve(trace.size());
    for (const auto& r : trace) {
        if (source == IntegralSource::Relevance) {
            if (!r.relevance) throw Error(ErrorCode::InvalidParameter, "trace has no relevance values");
            e.push_back(*r.relevance);
        } else {
            e.push_back(r.miss ? 1.0 : 0.0);
        }
    }
    return e;
}

InductionCheck check_induction_bound(std::span<const double> errors, double c, const Envelope& h, double alpha) {
    InductionCheck result;
    result.worst_margin = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const std::size_t T = i + 1;
        sum += errors[i] - alpha;
        const double margin = c * h(T) + 1.0 - std::abs(sum);
        if (margin < result.worst_margin) {
            result.worst_margin = margin;
            result.worst_step = T;
        }
        if (margin < 0.0 && !result.first_violation) {
            result.first_violation = T;
            result.held = false;
        }
    }
    if (errors.empty()) result.worst_margin = 0.0;
    return result;
}

double coverage_gap_bound(std::size_t T, double c, const Envelope& h) {
    return (c * h(T) + 2.0) / static_cast<double>(T);
}

std::size_t miss_spacing(double alpha) { return static_cast<std::size_t>(std::ceil(1.0 / alpha - 1e-12)); }

double eci_slope_ceiling(double eta, double B, double alpha, double U) {
    const double n = static_cast<double>(miss_spacing(alpha));
    return std::min(eta, n * n) / (2.0 * n * n * (B + eta * (1.0 - alpha + U)));
}

std::optional<std::size_t> relevance_dominance_start(std::span<const StepRecord> trace, double alpha, double tol) {
    require_nonempty(trace);
    double indicator_sum = 0.0;
    double relevance_sum = 0.0;
    std::size_t last_violation = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!trace[i].relevance) return std::nullopt;
        indicator_sum += (trace[i].miss ? 1.0 : 0.0) - alpha;
        relevance_sum += *trace[i].relevance - alpha;
        if (std::abs(indicator_sum) > std::abs(relevance_sum) + tol) last_violation = i + 1;
    }
    if (last_violation == trace.size()) return std::nullopt;
    return last_violation + 1;
}

double brute_quantile(std::vector<double> scores, double level) {
    if (scores.empty()) throw Error(ErrorCode::EmptyTrace, "quantile of an empty sample");
    std::sort(scores.begin(), scores.end());
    const double h = std::clamp(level, 0.0, 1.0) * static_cast<double>(scores.size() - 1);
    const double lo = std::floor(h);
    const auto i = static_cast<std::size_t>(lo);
    if (i + 1 >= scores.size()) return scores.back();
    return scores[i] + (h - lo) * (scores[i + 1] - scores[i]);
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyTrace, "median of an empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::string report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["method"] = report.method;
    j["dataset"] = report.dataset;
    j["regressor"] = report.regressor;
    j["coverage"] = report.coverage;
    j["avg_width"] = report.avg_width;
    j["median_width"] = report.median_width;
    j["n_steps"] = report.n_steps;
    j["config"] = nlohmann::json::parse(report.config_json);
    auto checks = nlohmann::json::array();
    for (const auto& b : report.bound_checks) {
        checks.push_back({{"name", b.name}, {"held", b.held}, {"margin", b.margin}});
    }
    j["bound_checks"] = std::move(checks);
    return j.dump(2);
}

std::string format_table(const std::string& dataset, std::span<const RunReport> reports) {
    std::vector<std::string> headers;
    for (const auto& r : reports) headers.push_back(r.regressor + " " + r.method);

    const std::vector<std::string> labels{"Coverage", "Average interval width", "Median interval width"};
    std::size_t label_w = std::string("Regressor / Method").size();
    for (const auto& l : labels) label_w = std::max(label_w, l.size());

    std::vector<std::size_t> col_w;
    for (const auto& h : headers) col_w.push_back(std::max<std::size_t>(h.size(), 8));

    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
    out << "Dataset: " << dataset << '\n';
    out << pad("Regressor / Method", label_w);
    for (std::size_t i = 0; i < headers.size(); ++i) out << " | " << pad(headers[i], col_w[i]);
    out << '\n';
    out << std::string(label_w, '-');
    for (std::size_t w : col_w) out << "-+-" << std::string(w, '-');
    out << '\n';
    for (std::size_t row = 0; row < labels.size(); ++row) {
        out << pad(labels[row], label_w);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            const double v = row == 0 ? r.coverage : row == 1 ? r.avg_width : r.median_width;
            out << " | " << pad(fixed(v, 2), col_w[i]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ocp
