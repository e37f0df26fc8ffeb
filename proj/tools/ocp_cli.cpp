// ocp: run online conformal experiments, grids and synthetic suites.

#include "ocp/error.hpp"
#include "ocp/evaluation.hpp"
#include "ocp/experiment.hpp"
#include "ocp/relevance.hpp"
#include "ocp/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <type_traits>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ocp::Error(ocp::ErrorCode::FileNotFound, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Flag values are collected as JSON so they overlay a --config file with the
// same parsing and validation as the file itself.
struct RunFlags {
    std::string config_path;
    std::string manifest = "configs/manifest.json";
    json overrides = json::object();
};

template <class T>
void bind_flag(CLI::App* cmd, json& target, const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = cmd->add_option_function<T>(flag, [&target, key](const T& value) { target[key] = value; }, help);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run config; flags override its keys");
    cmd->add_option("--manifest", f.manifest, "dataset manifest JSON")->capture_default_str();
    json& o = f.overrides;
    bind_flag<std::string>(cmd, o, "--dataset", "dataset", "manifest key");
    bind_flag<std::string>(cmd, o, "--regressor", "regressor", "ar | theta");
    bind_flag<std::size_t>(cmd, o, "--ar-p", "ar_p", "AR order");
    bind_flag<bool>(cmd, o, "--ar-intercept", "ar_intercept", "fit an AR intercept");
    bind_flag<double>(cmd, o, "--theta", "theta", "Theta coefficient");
    bind_flag<double>(cmd, o, "--ses-grid-step", "ses_grid_step", "SES smoothing grid step");
    bind_flag<std::string>(cmd, o, "--method", "method", "aci | ogd | pid | pid-full | pid-half | pid-half-bis | eci | eci-mod");
    bind_flag<double>(cmd, o, "--alpha", "alpha", "miscoverage level");
    bind_flag<double>(cmd, o, "--eta", "eta", "learning rate");
    bind_flag<double>(cmd, o, "--q0", "q0", "initial threshold");
    bind_flag<std::size_t>(cmd, o, "--train-window", "train_window", "sliding window length");
    bind_flag<std::size_t>(cmd, o, "--T_w,--tw", "T_w", "scale estimator window");
    bind_flag<std::vector<double>>(cmd, o, "--omega", "omega", "relevance weights");
    bind_flag<std::vector<double>>(cmd, o, "--v", "v", "relevance slopes");
    bind_flag<double>(cmd, o, "--gamma", "gamma", "ACI step size");
    bind_flag<double>(cmd, o, "--lambda", "lambda", "ECI smoothing");
    bind_flag<double>(cmd, o, "--k-i", "K_I", "saturation gain");
    bind_flag<double>(cmd, o, "--c-sat", "C_sat", "saturation constant");
    bind_flag<double>(cmd, o, "--output-cap", "output_cap", "saturation output cap");
    bind_flag<double>(cmd, o, "--mu-floor", "mu_floor", "lower clamp on mu");
    bind_flag<bool>(cmd, o, "--ogd-decay", "ogd_decay", "decay the OGD rate");
    bind_flag<double>(cmd, o, "--ogd-epsilon", "ogd_epsilon", "OGD decay exponent offset");
    bind_flag<std::string>(cmd, o, "--mu-mode", "mu_mode", "abs-sum | mean-abs");
    bind_flag<bool>(cmd, o, "--pure-integral", "pure_integral", "integrator-only update");
    bind_flag<std::uint64_t>(cmd, o, "--seed", "seed", "seed (synthetic data only)");
    bind_flag<std::string>(cmd, o, "--output-dir", "output_dir", "artifact directory");
    bind_flag<std::string>(cmd, o, "--run-id", "run_id", "run directory name");
}

int cmd_run(const RunFlags& f) {
    ocp::RunConfig base;
    if (!f.config_path.empty()) base = ocp::run_config_from_json(read_file(f.config_path));
    const auto config = ocp::merge_run_config(base, f.overrides.dump());
    if (config.dataset.empty()) throw ocp::Error(ocp::ErrorCode::InvalidConfig, "no dataset given");
    const auto manifest = ocp::DatasetManifest::load(f.manifest);
    const auto result = ocp::run_experiment(config, manifest);
    const fs::path dir = fs::path(config.output_dir) / config.effective_run_id();
    ocp::write_run_artifacts(result, dir);
    const auto& r = result.report;
    std::cout << config.effective_run_id() << ": coverage " << r.coverage << ", avg width " << r.avg_width
              << ", median width " << r.median_width << " (" << r.n_steps << " steps) -> " << dir.string() << '\n';
    return 0;
}

int cmd_grid(const std::string& config_path, const std::string& manifest_path, const std::string& out_dir,
             unsigned threads) {
    const auto configs = ocp::expand_grid(read_file(config_path));
    if (configs.empty()) {
        std::cout << "empty grid\n";
        return 0;
    }
    const auto manifest = ocp::DatasetManifest::load(manifest_path);
    const auto grid = ocp::run_grid(configs, manifest, threads);
    ocp::write_grid_artifacts(grid, out_dir);
    for (const auto& [dataset, table] : grid.tables) std::cout << table << '\n';
    for (const auto& e : grid.entries) {
        if (!e.error.empty()) std::cerr << "run " << e.config.effective_run_id() << " failed: " << e.error << '\n';
    }
    return grid.failures() == 0 ? 0 : 1;
}

int cmd_suite(const std::string& name, std::uint64_t seed, const ocp::SuiteOptions& opts, const std::string& out) {
    std::vector<std::string> names;
    if (name == "all") {
        names.assign(ocp::suite_names().begin(), ocp::suite_names().end());
    } else {
        names.push_back(name);
    }
    int status = 0;
    for (const auto& n : names) {
        const auto report = ocp::run_synthetic_suite(n, seed, opts);
        const auto text = ocp::suite_report_to_json(report);
        if (out.empty()) {
            std::cout << text << '\n';
        } else {
            fs::create_directories(out);
            std::ofstream(fs::path(out) / (n + "-" + std::to_string(seed) + ".json")) << text << '\n';
        }
        try {
            ocp::require_passed(report);
        } catch (const ocp::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            status = 1;
        }
    }
    return status;
}

int cmd_validate(const ocp::RelevanceParams& p, double eta, double bound) {
    ocp::validate(p);
    const double u = ocp::xgrad_sup(p);
    const double mu = ocp::effective_mu(p, 0.0);
    std::cout << "valid relevance parameters\n"
              << "  f(0)            = " << ocp::eval_f(p, 1.0, 0.0) << '\n'
              << "  sup |x f'(x)|   = " << u << '\n'
              << "  slope bound M   = " << ocp::slope_bound(p, mu) << " at mu = mu_floor\n";
    if (eta > 0.0) {
        const double ceiling = ocp::eci_slope_ceiling(eta, bound, p.alpha, u);
        const double nb = static_cast<double>(ocp::miss_spacing(p.alpha)) * bound;
        std::cout << "  eta > N B       : " << (eta > nb ? "yes" : "no") << " (N B = " << nb << ")\n"
                  << "  slope ceiling   = " << ceiling << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online conformal prediction with relevance-weighted PID updates"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "run one configuration");
    add_run_flags(run, run_flags);

    std::string grid_config;
    std::string grid_manifest = "configs/manifest.json";
    std::string grid_out = "out";
    unsigned threads = 1;
    auto* grid = app.add_subcommand("grid", "run a list of configurations");
    grid->add_option("--config", grid_config, "grid JSON")->required();
    grid->add_option("--manifest", grid_manifest, "dataset manifest JSON")->capture_default_str();
    grid->add_option("--output-dir", grid_out, "artifact directory")->capture_default_str();
    grid->add_option("--threads", threads, "concurrent runs")->capture_default_str();

    std::string suite_name = "all";
    std::uint64_t suite_seed = 0;
    std::string suite_out;
    ocp::SuiteOptions suite_opts;
    auto* suite = app.add_subcommand("suite", "synthetic bounded-score suites");
    suite->add_option("--name", suite_name, "pid-bounded | relevance-integral | eci-slope | all")->capture_default_str();
    suite->add_option("--seed", suite_seed, "generator seed")->capture_default_str();
    suite->add_option("--steps", suite_opts.steps, "steps T")->capture_default_str();
    suite->add_option("--alpha", suite_opts.alpha, "miscoverage level")->capture_default_str();
    suite->add_option("--bound", suite_opts.bound, "score bound (b or B)")->capture_default_str();
    suite->add_option("--output-dir", suite_out, "write reports here instead of stdout");

    ocp::RelevanceParams rel;
    double val_eta = 0.0;
    double val_bound = 1.0;
    auto* val = app.add_subcommand("validate-params", "check relevance parameters");
    val->add_option("--omega", rel.omega, "weights (simplex)")->delimiter(',');
    val->add_option("--v", rel.v, "slopes (> 0)")->delimiter(',');
    val->add_option("--alpha", rel.alpha, "miscoverage level")->capture_default_str();
    val->add_option("--mu-floor", rel.mu_floor, "lower clamp on mu")->capture_default_str();
    val->add_option("--eta", val_eta, "also report the ECI slope ceiling for this eta");
    val->add_option("--bound", val_bound, "score bound B")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_flags);
        if (*grid) return cmd_grid(grid_config, grid_manifest, grid_out, threads);
        if (*suite) return cmd_suite(suite_name, suite_seed, suite_opts, suite_out);
        if (*val) return cmd_validate(rel, val_eta, val_bound);
    } catch (const ocp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
