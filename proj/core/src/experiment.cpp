#include "ocp/experiment.hpp"

#include "ocp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace ocp {

namespace {

using nlohmann::json;

double iqr(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    return brute_quantile(v, 0.75) - brute_quantile(v, 0.25);
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
    } else {
        out = j.at(key).get<T>();
    }
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "dataset", "regressor", "ar_p",          "ar_intercept", "theta",       "ses_grid_step", "method",
        "alpha",   "eta",       "q0",            "train_window", "T_w",         "omega",         "v",
        "gamma",   "lambda",    "K_I",           "C_sat",        "output_cap",  "mu_floor",      "ogd_decay",
        "ogd_epsilon", "mu_mode", "pure_integral", "seed",       "output_dir",  "run_id"};
    return keys;
}

void apply_json(RunConfig& c, const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "run config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (known_keys().count(key) == 0) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
    try {
        read_if(j, "dataset", c.dataset);
        read_if(j, "regressor", c.regressor.name);
        read_if(j, "ar_p", c.regressor.ar.p);
        read_if(j, "ar_intercept", c.regressor.ar.include_intercept);
        read_if(j, "theta", c.regressor.theta.theta);
        read_if(j, "ses_grid_step", c.regressor.theta.ses_grid_step);
        read_if(j, "method", c.method);
        read_if(j, "alpha", c.alpha);
        read_if(j, "eta", c.eta);
        read_if(j, "q0", c.q0);
        read_if(j, "train_window", c.train_window);
        read_if(j, "T_w", c.T_w);
        read_if(j, "omega", c.omega);
        read_if(j, "v", c.v);
        read_if(j, "gamma", c.gamma);
        read_if(j, "lambda", c.lambda);
        read_optional(j, "K_I", c.k_i);
        read_if(j, "C_sat", c.c_sat);
        read_optional(j, "output_cap", c.output_cap);
        read_optional(j, "mu_floor", c.mu_floor);
        read_if(j, "ogd_decay", c.ogd_decay);
        read_if(j, "ogd_epsilon", c.ogd_epsilon);
        read_if(j, "mu_mode", c.mu_mode);
        read_if(j, "pure_integral", c.pure_integral);
        read_if(j, "seed", c.seed);
        read_if(j, "output_dir", c.output_dir);
        read_if(j, "run_id", c.run_id);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
    }
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("invalid JSON: ") + e.what());
    }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_json(const RunConfig& c) {
    return json{{"dataset", c.dataset},
                {"regressor", c.regressor.name},
                {"ar_p", c.regressor.ar.p},
                {"ar_intercept", c.regressor.ar.include_intercept},
                {"theta", c.regressor.theta.theta},
                {"ses_grid_step", c.regressor.theta.ses_grid_step},
                {"method", c.method},
                {"alpha", c.alpha},
                {"eta", c.eta},
                {"q0", c.q0},
                {"train_window", c.train_window},
                {"T_w", c.T_w},
                {"omega", c.omega},
                {"v", c.v},
                {"gamma", c.gamma},
                {"lambda", c.lambda},
                {"K_I", optional_json(c.k_i)},
                {"C_sat", c.c_sat},
                {"output_cap", optional_json(c.output_cap)},
                {"mu_floor", optional_json(c.mu_floor)},
                {"ogd_decay", c.ogd_decay},
                {"ogd_epsilon", c.ogd_epsilon},
                {"mu_mode", c.mu_mode},
                {"pure_integral", c.pure_integral},
                {"seed", c.seed},
                {"output_dir", c.output_dir},
                {"run_id", c.run_id}};
}

ResolvedParams resolve_params(const RunConfig& c, std::span<const double> first_window,
                              std::span<const double> in_sample_scores) {
    ResolvedParams r;
    const double score_iqr = iqr(in_sample_scores);
    const auto [lo, hi] = std::minmax_element(in_sample_scores.begin(), in_sample_scores.end());
    const double score_range = *hi - *lo;
    const double value_iqr = iqr(first_window);
    r.k_i = c.k_i ? *c.k_i : (score_iqr > 0.0 ? score_iqr : 1.0);
    r.output_cap = c.output_cap ? *c.output_cap : (score_range > 0.0 ? 10.0 * score_range : 1.0);
    r.mu_floor = c.mu_floor ? *c.mu_floor : (value_iqr > 0.0 ? 1e-8 * value_iqr : 1e-8);
    return r;
}

// Replays mu_t from the recorded gaps and returns max_t of the slope bound M_t.
double max_slope_bound(const MethodConfig& m, std::span<const StepRecord> trace) {
    ScaleEstimator est(m.relevance.window, m.mu_mode);
    double worst = 0.0;
    for (const auto& r : trace) {
        worst = std::max(worst, slope_bound(m.relevance, est.mu()));
        est.push(r.gap);
    }
    return worst;
}

std::vector<BoundCheck> bound_checks(const MethodConfig& m, std::span<const StepRecord> trace) {
    std::vector<BoundCheck> checks;
    const double c = 1.0;
    const double c_sat = m.saturation.c_sat;
    const Envelope h = [c_sat](std::size_t t) { return saturation_envelope(t, c_sat); };
    const std::size_t T = trace.size();

    const double gap = longrun_coverage_gap(trace, m.alpha);
    const double gap_bound = coverage_gap_bound(T, c, h);
    checks.push_back({"coverage_gap_bound", gap <= gap_bound, gap_bound - gap});

    const IntegralSource source = integral_source(m.method);
    if (source != IntegralSource::None) {
        const auto e = error_terms(trace, source);
        const auto ind = check_induction_bound(e, c, h, m.alpha);
        checks.push_back({"induction_bound", ind.held, ind.worst_margin});
    }
    if (m.method == Method::PidFull || m.method == Method::PidHalf) {
        const auto from = relevance_dominance_start(trace, m.alpha);
        const double frac = from ? static_cast<double>(T - *from + 1) / static_cast<double>(T) : 0.0;
        checks.push_back({"relevance_dominance", from.has_value(), frac});
    }
    if (m.method == Method::Eci || m.method == Method::EciMod) {
        double max_score = 0.0;
        for (const auto& r : trace) max_score = std::max(max_score, r.score);
        const double nb = static_cast<double>(miss_spacing(m.alpha)) * max_score;
        checks.push_back({"eci_eta_exceeds_NB", m.eta > nb, m.eta - nb});
        if (m.method == Method::EciMod) {
            const double threshold = eci_slope_ceiling(m.eta, max_score, m.alpha, xgrad_sup(m.relevance));
            const double worst = max_slope_bound(m, trace);
            checks.push_back({"eci_slope_bound", worst < threshold, threshold - worst});
        }
    }
    return checks;
}

}  // namespace

std::string RunConfig::effective_run_id() const {
    if (!run_id.empty()) return run_id;
    return dataset + "-" + regressor.name + "-" + method;
}

RunConfig run_config_from_json(const std::string& json_text) { return merge_run_config(RunConfig{}, json_text); }

RunConfig merge_run_config(const RunConfig& base, const std::string& json_text) {
    RunConfig c = base;
    apply_json(c, parse_json(json_text));
    return c;
}

std::string run_config_to_json(const RunConfig& config) { return config_json(config).dump(2); }

MethodConfig method_config_for(const RunConfig& c, const ResolvedParams& resolved,
                               std::vector<double> calibration_scores) {
    MethodConfig m;
    m.method = method_from_string(c.method);
    m.alpha = c.alpha;
    m.eta = c.eta;
    m.q0 = c.q0;
    m.gamma = c.gamma;
    m.calibration_window = c.train_window;
    m.calibration_scores = std::move(calibration_scores);
    m.ogd_decay = c.ogd_decay;
    m.ogd_epsilon = c.ogd_epsilon;
    m.saturation = SaturationConfig{resolved.k_i, c.c_sat, resolved.output_cap};
    m.pure_integral = c.pure_integral;
    m.lambda = c.lambda;
    m.relevance = RelevanceParams{c.omega, c.v, c.alpha, c.T_w, resolved.mu_floor};
    m.mu_mode = mu_mode_from_string(c.mu_mode);
    if (uses_relevance(m.method)) validate(m.relevance);
    return m;
}

RunResult run_experiment(const RunConfig& config, const UnivariateSeries& series) {
    const auto views = windows(series, config.train_window);
    const auto regressor = make_regressor(config.regressor);

    const auto first_window = views.front().training();
    auto calibration = regressor->in_sample_scores(first_window);
    const ResolvedParams resolved = resolve_params(config, first_window, calibration);
    const MethodConfig method = method_config_for(config, resolved, std::move(calibration));
    auto updater = make_updater(method);

    std::vector<StepRecord> trace;
    trace.reserve(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& view = views[i];
        const double forecast = regressor->fit_forecast(view.training());
        const double q = updater->threshold();
        const auto interval = build_interval(forecast, q);
        // Y_t is read only after the interval for step t is fixed.
        const double truth = view.target();
        const auto ev = evaluate_step(interval, truth, q);
        const auto upd = updater->update({ev.score, ev.gap, ev.miss});
        trace.push_back({i + 1, forecast, truth, ev.score, q, ev.miss, ev.gap, upd.relevance, upd.q_next});
    }

    RunResult result{config, resolved, std::move(trace), {}};
    result.report = summarize(result.trace);
    result.report.method = config.method;
    result.report.dataset = config.dataset.empty() ? series.name() : config.dataset;
    result.report.regressor = config.regressor.name;
    json echo = config_json(config);
    echo["resolved"] = {{"K_I", resolved.k_i}, {"output_cap", resolved.output_cap}, {"mu_floor", resolved.mu_floor}};
    result.report.config_json = echo.dump();
    result.report.bound_checks = bound_checks(method, result.trace);
    return result;
}

RunResult run_experiment(const RunConfig& config, const DatasetManifest& manifest) {
    const auto series = manifest.load_series(config.dataset);
    return run_experiment(config, series);
}

void write_run_artifacts(const RunResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "trace.csv", std::ios::binary);
        write_trace_csv(out, result.trace);
    }
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        out << report_to_json(result.report) << '\n';
    }
    {
        std::ofstream out(dir / "table.txt", std::ios::binary);
        out << format_table(result.report.dataset, std::span(&result.report, 1));
    }
}

std::size_t GridResult::failures() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const GridEntry& e) { return !e.result; }));
}

std::vector<RunConfig> expand_grid(const std::string& json_text) {
    const json doc = parse_json(json_text);
    std::vector<RunConfig> configs;
    if (doc.is_array()) {
        for (const auto& item : doc) configs.push_back(merge_run_config(RunConfig{}, item.dump()));
        return configs;
    }
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "grid must be a JSON array or object");
    RunConfig base;
    if (doc.contains("base")) apply_json(base, doc.at("base"));

    auto list = [&](const char* key) {
        std::vector<std::string> out;
        if (doc.contains(key)) out = doc.at(key).get<std::vector<std::string>>();
        return out;
    };
    const auto datasets = list("datasets");
    const auto regressors = list("regressors");
    const auto methods = list("methods");
    if (!datasets.empty() || !regressors.empty() || !methods.empty()) {
        const std::vector<std::string> ds = datasets.empty() ? std::vector{base.dataset} : datasets;
        const std::vector<std::string> rs = regressors.empty() ? std::vector{base.regressor.name} : regressors;
        const std::vector<std::string> ms = methods.empty() ? std::vector{base.method} : methods;
        for (const auto& d : ds) {
            for (const auto& r : rs) {
                for (const auto& m : ms) {
                    RunConfig c = base;
                    c.dataset = d;
                    c.regressor.name = r;
                    c.method = m;
                    configs.push_back(std::move(c));
                }
            }
        }
    }
    if (doc.contains("runs")) {
        for (const auto& item : doc.at("runs")) {
            RunConfig c = base;
            apply_json(c, item);
            configs.push_back(std::move(c));
        }
    }
    for (const auto& [key, value] : doc.items()) {
        static const std::set<std::string> grid_keys{"base", "datasets", "regressors", "methods", "runs"};
        if (grid_keys.count(key) == 0) throw Error(ErrorCode::InvalidConfig, "unknown grid key '" + key + "'");
    }
    return configs;
}

GridResult run_grid(const std::vector<RunConfig>& configs, const DatasetManifest& manifest, unsigned threads) {
    GridResult grid;
    grid.entries.resize(configs.size());

    // Series are loaded once and shared read-only across workers.
    std::map<std::string, std::optional<UnivariateSeries>> series;
    std::map<std::string, std::string> load_errors;
    for (const auto& c : configs) {
        if (series.count(c.dataset) != 0 || load_errors.count(c.dataset) != 0) continue;
        try {
            series.emplace(c.dataset, manifest.load_series(c.dataset));
        } catch (const std::exception& e) {
            load_errors.emplace(c.dataset, e.what());
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            auto& entry = grid.entries[i];
            entry.config = configs[i];
            if (const auto it = load_errors.find(configs[i].dataset); it != load_errors.end()) {
                entry.error = it->second;
                continue;
            }
            try {
                entry.result = run_experiment(configs[i], *series.at(configs[i].dataset));
            } catch (const std::exception& e) {
                entry.error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    }

    std::vector<std::string> order;
    std::map<std::string, std::vector<RunReport>> by_dataset;
    for (const auto& e : grid.entries) {
        if (!e.result) continue;
        if (by_dataset.count(e.config.dataset) == 0) order.push_back(e.config.dataset);
        by_dataset[e.config.dataset].push_back(e.result->report);
    }
    for (const auto& d : order) grid.tables.emplace_back(d, format_table(d, by_dataset[d]));
    return grid;
}

void write_grid_artifacts(const GridResult& grid, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::map<std::string, int> seen;
    for (const auto& e : grid.entries) {
        if (!e.result) continue;
        std::string id = e.config.effective_run_id();
        if (const int k = seen[id]++; k > 0) id += "-" + std::to_string(k);
        write_run_artifacts(*e.result, dir / id);
    }
    for (const auto& [dataset, table] : grid.tables) {
        std::ofstream out(dir / ("table_" + dataset + ".txt"), std::ios::binary);
        out << table;
    }
}

}  // namespace ocp
