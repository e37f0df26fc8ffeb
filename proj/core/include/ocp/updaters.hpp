#pragma once

#include "ocp/relevance.hpp"

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocp {

/// Integral nonlinearity of the PID family
///
///     r_t(x) = K_I * tan(x * log(t) / (t * C_sat))
///
/// with the tangent replaced by +-output_cap once its argument leaves
/// (-pi/2, pi/2). Magnitudes are also capped at output_cap so r_t stays
/// monotone in x. r_1 is identically 0.
struct SaturationConfig {
    double k_i = 1.0;
    double c_sat = 1.0;
    double output_cap = 1e6;
};

void validate(const SaturationConfig& config);

double saturation(std::size_t t, double x, const SaturationConfig& config);

/// h(t) = (pi/2) * t * C_sat / log(max(t, 2)). For t >= 2, |x| >= h(t)
/// drives r_t to +-output_cap, so (b, c) = (output_cap, 1) witness the
/// saturation property with this h.
double saturation_envelope(std::size_t t, double c_sat);

/// Evolving state shared by all updaters. `t` counts observations so far;
/// step functions read the 1-based index of the step being processed as
/// t + 1.
struct ThresholdState {
    double q = 0.0;
    double alpha_t = 0.1;
    std::size_t t = 0;
    double integral_sum = 0.0;
};

inline constexpr double kAciLevelMin = 0.001;
inline constexpr double kAciLevelMax = 0.999;

/// alpha_{t+1} = clip(alpha_t + gamma * (alpha - 1{miss})). q is untouched;
/// the caller maps the level to a threshold.
ThresholdState aci_step(ThresholdState state, bool miss, double alpha, double gamma);

/// q_{t+1} = q_t + eta * (1{miss} - alpha).
ThresholdState ogd_step(ThresholdState state, bool miss, double alpha, double eta);

/// eta * t^(-1/2 - epsilon), t 1-based.
double ogd_decayed_rate(double eta, std::size_t t, double epsilon);

/// Conformal PI control with the identity scorecaster:
/// q_{t+1} = q_t + eta * (1{miss} - alpha) + r_t(sum_i (1{miss_i} - alpha)).
ThresholdState pid_step(ThresholdState state, bool miss, double alpha, double eta, const SaturationConfig& sat);

/// Relevance in both the proportional and the integral term.
ThresholdState pid_full_step(ThresholdState state, double f_value, double alpha, double eta,
                             const SaturationConfig& sat);

/// Relevance in the integral term only.
ThresholdState pid_half_step(ThresholdState state, bool miss, double f_value, double alpha, double eta,
                             const SaturationConfig& sat);

/// Relevance in the proportional term only.
ThresholdState pid_half_bis_step(ThresholdState state, bool miss, double f_value, double alpha, double eta,
                                 const SaturationConfig& sat);

/// q_{t+1} = r_t(sum_i (e_i - alpha)): the integrator alone, with no
/// proportional term and no carried-over threshold.
ThresholdState pid_integral_only_step(ThresholdState state, double error_term, double alpha,
                                      const SaturationConfig& sat);

/// x * g'(x) for g(x) = sigma(lambda x).
double eci_smoothing_term(double gap, double lambda);

/// q_{t+1} = q_t + eta * (1{miss} - alpha + gap * g'(gap)), g = sigma(lambda .).
ThresholdState eci_step(ThresholdState state, bool miss, double gap, double alpha, double eta, double lambda);

/// ECI with the relevance gradient in place of g'.
ThresholdState eci_modified_step(ThresholdState state, bool miss, double gap, const RelevanceParams& params,
                                 double mu, double eta);

/// Fixed-capacity FIFO of scores with an incrementally maintained sorted
/// copy; quantiles use linear interpolation between order statistics.
class RollingQuantile {
public:
    explicit RollingQuantile(std::size_t capacity);

    void push(double value);
    [[nodiscard]] double quantile(double level) const;
    [[nodiscard]] std::size_t size() const noexcept { return fifo_.size(); }
    [[nodiscard]] bool empty() const noexcept { return fifo_.empty(); }

private:
    std::size_t capacity_;
    std::deque<double> fifo_;
    std::vector<double> sorted_;
};

enum class Method { Aci, Ogd, Pid, PidFull, PidHalf, PidHalfBis, Eci, EciMod };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
std::span<const Method> all_methods();

/// Which error term feeds a method's integrator.
enum class IntegralSource { None, Indicator, Relevance };

IntegralSource integral_source(Method method);
bool uses_relevance(Method method);

struct MethodConfig {
    Method method = Method::Pid;
    double alpha = 0.1;
    double eta = 0.005;
    double q0 = 0.0;

    // aci
    double gamma = 0.005;
    std::size_t calibration_window = 365;
    std::vector<double> calibration_scores;

    // ogd
    bool ogd_decay = false;
    double ogd_epsilon = 0.1;

    // pid family
    SaturationConfig saturation;
    bool pure_integral = false;

    // eci
    double lambda = 1.0;

    // relevance-aware variants; alpha is overwritten with the method alpha
    RelevanceParams relevance;
    MuMode mu_mode = MuMode::AbsSum;
    RelevanceSchedule schedule;
};

/// Observed outcome of step t, computed from the raw threshold q_t.
struct Observation {
    double score = 0.0;
    double gap = 0.0;
    bool miss = false;
};

struct UpdateResult {
    double q_next = 0.0;
    std::optional<double> relevance;
};

/// Online threshold updater: threshold() is q_t for the pending step;
/// update() consumes step t and advances to q_{t+1}.
class Updater {
public:
    virtual ~Updater() = default;

    [[nodiscard]] virtual Method method() const = 0;
    [[nodiscard]] double threshold() const noexcept { return state_.q; }
    [[nodiscard]] const ThresholdState& state() const noexcept { return state_; }

    virtual UpdateResult update(const Observation& obs) = 0;

protected:
    ThresholdState state_;
};

std::unique_ptr<Updater> make_updater(const MethodConfig& config);

}  // namespace ocp
