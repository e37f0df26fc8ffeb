#pragma once

#include "ocp/conformal.hpp"
#include "ocp/evaluation.hpp"
#include "ocp/forecasters.hpp"
#include "ocp/series.hpp"
#include "ocp/updaters.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ocp {

/// Flat run configuration. Unset optionals are resolved from the first
/// training window (see ResolvedParams).
struct RunConfig {
    std::string dataset;
    RegressorConfig regressor;
    std::string method = "pid";
    double alpha = 0.1;
    double eta = 0.005;
    double q0 = 0.0;
    std::size_t train_window = kDefaultWindowLen;
    std::size_t T_w = 100;
    std::vector<double> omega{1.0};
    std::vector<double> v{4.0};
    double gamma = 0.005;
    double lambda = 1.0;
    std::optional<double> k_i;
    double c_sat = 1.0;
    std::optional<double> output_cap;
    std::optional<double> mu_floor;
    bool ogd_decay = false;
    double ogd_epsilon = 0.1;
    std::string mu_mode = "abs-sum";
    bool pure_integral = false;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::string run_id;

    [[nodiscard]] std::string effective_run_id() const;
};

RunConfig run_config_from_json(const std::string& json_text);
/// Overlays the keys present in `json_text` onto `base`.
RunConfig merge_run_config(const RunConfig& base, const std::string& json_text);
std::string run_config_to_json(const RunConfig& config);

/// Data-dependent defaults, fixed from the first training window:
///   K_I        = IQR of in-sample one-step scores
///   output_cap = 10 x range of those scores
///   mu_floor   = 1e-8 x IQR of the window values
struct ResolvedParams {
    double k_i = 1.0;
    double output_cap = 1.0;
    double mu_floor = 1e-8;
};

struct RunResult {
    RunConfig config;
    ResolvedParams resolved;
    std::vector<StepRecord> trace;
    RunReport report;
};

/// The online loop: for each cursor refit on the sliding window, forecast,
/// build the interval from q_t, reveal Y_t, score, update.
RunResult run_experiment(const RunConfig& config, const UnivariateSeries& series);
RunResult run_experiment(const RunConfig& config, const DatasetManifest& manifest);

/// Builds the updater configuration a run would use (exposed for tests).
MethodConfig method_config_for(const RunConfig& config, const ResolvedParams& resolved,
                               std::vector<double> calibration_scores = {});

/// Writes <dir>/trace.csv, report.json and table.txt.
void write_run_artifacts(const RunResult& result, const std::filesystem::path& dir);

struct GridEntry {
    RunConfig config;
    std::optional<RunResult> result;
    std::string error;
};

struct GridResult {
    std::vector<GridEntry> entries;
    std::vector<std::pair<std::string, std::string>> tables;  ///< (dataset, table text)

    [[nodiscard]] std::size_t failures() const;
};

/// Accepts either a JSON array of run configs or an object
///   {"base": {...}, "datasets": [...], "regressors": [...], "methods": [...],
///    "runs": [{...}, ...]}
/// expanded dataset-major, then regressor, then method; "runs" entries are
/// overlaid on "base" and appended.
std::vector<RunConfig> expand_grid(const std::string& json_text);

/// Runs every config (concurrently when threads > 1). Individual failures
/// are recorded and the grid continues. Output order follows `configs`.
GridResult run_grid(const std::vector<RunConfig>& configs, const DatasetManifest& manifest, unsigned threads = 1);

/// Writes per-run artifacts and one table_<dataset>.txt per dataset.
void write_grid_artifacts(const GridResult& grid, const std::filesystem::path& dir);

}  // namespace ocp
