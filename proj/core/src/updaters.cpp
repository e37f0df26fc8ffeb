#include "ocp/updaters.hpp"

#include "ocp/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace ocp {

namespace {

double indicator(bool miss) { return miss ? 1.0 : 0.0; }

ThresholdState pid_generic(ThresholdState s, double proportional_err, double integral_err, double alpha, double eta,
                           const SaturationConfig& sat) {
    const std::size_t t = s.t + 1;
    s.integral_sum += integral_err - alpha;
    s.q = s.q + eta * (proportional_err - alpha) + saturation(t, s.integral_sum, sat);
    s.t = t;
    return s;
}

}  // namespace

void validate(const SaturationConfig& config) {
    if (!(config.k_i > 0.0)) throw Error(ErrorCode::InvalidParameter, "K_I must be > 0");
    if (!(config.c_sat > 0.0)) throw Error(ErrorCode::InvalidParameter, "C_sat must be > 0");
    if (!(config.output_cap > 0.0)) throw Error(ErrorCode::InvalidParameter, "output_cap must be > 0");
}

double saturation(std::size_t t, double x, const SaturationConfig& config) {
    if (t <= 1 || x == 0.0) return 0.0;
    const double td = static_cast<double>(t);
    const double arg = x * std::log(td) / (td * config.c_sat);
    if (std::abs(arg) >= std::numbers::pi / 2.0) return std::copysign(config.output_cap, x);
    return std::clamp(config.k_i * std::tan(arg), -config.output_cap, config.output_cap);
}

double saturation_envelope(std::size_t t, double c_sat) {
    const double td = static_cast<double>(t);
    return std::numbers::pi / 2.0 * td * c_sat / std::log(std::max(td, 2.0));
}

ThresholdState aci_step(ThresholdState s, bool miss, double alpha, double gamma) {
    s.alpha_t = std::clamp(s.alpha_t + gamma * (alpha - indicator(miss)), kAciLevelMin, kAciLevelMax);
    s.t += 1;
    return s;
}

ThresholdState ogd_step(ThresholdState s, bool miss, double alpha, double eta) {
    s.q += eta * (indicator(miss) - alpha);
    s.t += 1;
    return s;
}

double ogd_decayed_rate(double eta, std::size_t t, double epsilon) {
    return eta * std::pow(static_cast<double>(t), -0.5 - epsilon);
}

ThresholdState pid_step(ThresholdState s, bool miss, double alpha, double eta, const SaturationConfig& sat) {
    return pid_generic(s, indicator(miss), indicator(miss), alpha, eta, sat);
}

ThresholdState pid_full_step(ThresholdState s, double f_value, double alpha, double eta,
                             const SaturationConfig& sat) {
    return pid_generic(s, f_value, f_value, alpha, eta, sat);
}

ThresholdState pid_half_step(ThresholdState s, bool miss, double f_value, double alpha, double eta,
                             const SaturationConfig& sat) {
    return pid_generic(s, indicator(miss), f_value, alpha, eta, sat);
}

ThresholdState pid_half_bis_step(ThresholdState s, bool miss, double f_value, double alpha, double eta,
                                 const SaturationConfig& sat) {
    return pid_generic(s, f_value, indicator(miss), alpha, eta, sat);
}

ThresholdState pid_integral_only_step(ThresholdState s, double error_term, double alpha,
                                      const SaturationConfig& sat) {
    const std::size_t t = s.t + 1;
    s.integral_sum += error_term - alpha;
    s.q = saturation(t, s.integral_sum, sat);
    s.t = t;
    return s;
}

double eci_smoothing_term(double gap, double lambda) {
    return gap * lambda * sigmoid_slope(lambda * gap);
}

ThresholdState eci_step(ThresholdState s, bool miss, double gap, double alpha, double eta, double lambda) {
    s.q += eta * (indicator(miss) - alpha + eci_smoothing_term(gap, lambda));
    s.t += 1;
    return s;
}

ThresholdState eci_modified_step(ThresholdState s, bool miss, double gap, const RelevanceParams& params, double mu,
                                 double eta) {
    s.q += eta * (indicator(miss) - params.alpha + gap * grad_f(params, mu, gap));
    s.t += 1;
    return s;
}

RollingQuantile::RollingQuantile(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(ErrorCode::InvalidParameter, "rolling quantile capacity must be positive");
    sorted_.reserve(capacity_ + 1);
}

void RollingQuantile::push(double value) {
    fifo_.push_back(value);
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), value), value);
    if (fifo_.size() > capacity_) {
        const double old = fifo_.front();
        fifo_.pop_front();
        sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), old));
    }
}

double RollingQuantile::quantile(double level) const {
    if (sorted_.empty()) throw Error(ErrorCode::EmptyTrace, "quantile of an empty window");
    level = std::clamp(level, 0.0, 1.0);
    const double pos = level * static_cast<double>(sorted_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted_[lo] + frac * (sorted_[hi] - sorted_[lo]);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::Aci: return "aci";
        case Method::Ogd: return "ogd";
        case Method::Pid: return "pid";
        case Method::PidFull: return "pid-full";
        case Method::PidHalf: return "pid-half";
        case Method::PidHalfBis: return "pid-half-bis";
        case Method::Eci: return "eci";
        case Method::EciMod: return "eci-mod";
    }
    return "unknown";
}

std::span<const Method> all_methods() {
    static constexpr std::array kMethods{Method::Aci,     Method::Ogd,        Method::Pid, Method::PidFull,
                                         Method::PidHalf, Method::PidHalfBis, Method::Eci, Method::EciMod};
    return kMethods;
}

Method method_from_string(const std::string& name) {
    for (Method m : all_methods()) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorCode::UnknownMethod, "unknown method '" + name + "'");
}

IntegralSource integral_source(Method method) {
    switch (method) {
        case Method::Pid:
        case Method::PidHalfBis: return IntegralSource::Indicator;
        case Method::PidFull:
        case Method::PidHalf: return IntegralSource::Relevance;
        default: return IntegralSource::None;
    }
}

bool uses_relevance(Method method) {
    return method == Method::PidFull || method == Method::PidHalf || method == Method::PidHalfBis ||
           method == Method::EciMod;
}

namespace {

class AciUpdater final : public Updater {
public:
    explicit AciUpdater(const MethodConfig& c) : config_(c), window_(c.calibration_window) {
        for (double s : c.calibration_scores) window_.push(s);
        state_.alpha_t = c.alpha;
        state_.q = window_.empty() ? c.q0 : window_.quantile(1.0 - state_.alpha_t);
    }
    [[nodiscard]] Method method() const override { return Method::Aci; }

    UpdateResult update(const Observation& obs) override {
        window_.push(obs.score);
        const double q_prev = state_.q;
        state_ = aci_step(state_, obs.miss, config_.alpha, config_.gamma);
        state_.q = window_.empty() ? q_prev : window_.quantile(1.0 - state_.alpha_t);
        return {state_.q, std::nullopt};
    }

private:
    MethodConfig config_;
    RollingQuantile window_;
};

class OgdUpdater final : public Updater {
public:
    explicit OgdUpdater(const MethodConfig& c) : config_(c) { state_.q = c.q0; }
    [[nodiscard]] Method method() const override { return Method::Ogd; }

    UpdateResult update(const Observation& obs) override {
        const double eta =
            config_.ogd_decay ? ogd_decayed_rate(config_.eta, state_.t + 1, config_.ogd_epsilon) : config_.eta;
        state_ = ogd_step(state_, obs.miss, config_.alpha, eta);
        return {state_.q, std::nullopt};
    }

private:
    MethodConfig config_;
};

class RelevanceTracker {
public:
    explicit RelevanceTracker(const MethodConfig& c)
        : params_(c.relevance), schedule_(c.schedule), estimator_(c.relevance.window, c.mu_mode) {
        params_.alpha = c.alpha;
        validate(params_);
    }

    // Params and mu in force at 1-based step t (mu uses gaps before t).
    [[nodiscard]] RelevanceParams params_at(std::size_t t) const {
        if (!schedule_) return params_;
        RelevanceParams p = schedule_(t);
        p.alpha = params_.alpha;
        return validate(p);
    }
    [[nodiscard]] double mu() const noexcept { return estimator_.mu(); }
    void record(double gap) { estimator_.push(gap); }

private:
    RelevanceParams params_;
    RelevanceSchedule schedule_;
    ScaleEstimator estimator_;
};

class PidUpdater final : public Updater {
public:
    explicit PidUpdater(const MethodConfig& c) : config_(c) {
        validate(c.saturation);
        state_.q = c.q0;
        if (uses_relevance(c.method)) relevance_.emplace(c);
    }
    [[nodiscard]] Method method() const override { return config_.method; }

    UpdateResult update(const Observation& obs) override {
        std::optional<double> f;
        if (relevance_) {
            const std::size_t t = state_.t + 1;
            f = eval_f(relevance_->params_at(t), relevance_->mu(), obs.gap);
            relevance_->record(obs.gap);
        }
        const double a = config_.alpha;
        const double e = config_.eta;
        const auto& sat = config_.saturation;
        if (config_.pure_integral) {
            const double err = integral_source(config_.method) == IntegralSource::Relevance ? *f : (obs.miss ? 1.0 : 0.0);
            state_ = pid_integral_only_step(state_, err, a, sat);
            return {state_.q, f};
        }
        switch (config_.method) {
            case Method::Pid: state_ = pid_step(state_, obs.miss, a, e, sat); break;
            case Method::PidFull: state_ = pid_full_step(state_, *f, a, e, sat); break;
            case Method::PidHalf: state_ = pid_half_step(state_, obs.miss, *f, a, e, sat); break;
            case Method::PidHalfBis: state_ = pid_half_bis_step(state_, obs.miss, *f, a, e, sat); break;
            default: throw Error(ErrorCode::UnknownMethod, "not a PID method");
        }
        return {state_.q, f};
    }

private:
    MethodConfig config_;
    std::optional<RelevanceTracker> relevance_;
};

class EciUpdater final : public Updater {
public:
    explicit EciUpdater(const MethodConfig& c) : config_(c) {
        state_.q = c.q0;
        if (c.method == Method::EciMod) relevance_.emplace(c);
    }
    [[nodiscard]] Method method() const override { return config_.method; }

    UpdateResult update(const Observation& obs) override {
        if (!relevance_) {
            state_ = eci_step(state_, obs.miss, obs.gap, config_.alpha, config_.eta, config_.lambda);
            return {state_.q, std::nullopt};
        }
        const auto params = relevance_->params_at(state_.t + 1);
        const double mu = relevance_->mu();
        const double f = eval_f(params, mu, obs.gap);
        relevance_->record(obs.gap);
        state_ = eci_modified_step(state_, obs.miss, obs.gap, params, mu, config_.eta);
        return {state_.q, f};
    }

private:
    MethodConfig config_;
    std::optional<RelevanceTracker> relevance_;
};

}  // namespace

std::unique_ptr<Updater> make_updater(const MethodConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
    switch (config.method) {
        case Method::Aci: return std::make_unique<AciUpdater>(config);
        case Method::Ogd: return std::make_unique<OgdUpdater>(config);
        case Method::Pid:
        case Method::PidFull:
        case Method::PidHalf:
        case Method::PidHalfBis: return std::make_unique<PidUpdater>(config);
        case Method::Eci:
        case Method::EciMod: return std::make_unique<EciUpdater>(config);
    }
    throw Error(ErrorCode::UnknownMethod, "unknown method");
}

}  // namespace ocp
