#pragma once
/**
 * @file navigation.hpp
 * @brief Simple and Predictive feedback controllers on a fixed tick, plus trial termination.
 *
 * All durations are rounded up to whole ticks. A phase entered on tick k
 * emits its command on tick k; a phase lasting n ticks hands over on k+n.
 */

#include "biobot/insect.hpp"
#include "biobot/sensing.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

namespace biobot {

struct NavParams {
    double gamma_t_deg{25.0};
    double omega_t_dps{5.0};
    double v_t_cmps{2.0};
    double t_v_ms{500.0};
    double t_f1_ms{250.0};
    double t_f2_ms{500.0};
    double t_f3_ms{250.0};
    double d_a_ms{2000.0};
    double d_s_ms{2000.0};
    double tick_ms{30.0};
    double trial_limit_s{100.0};
    double motionless_window_s{5.0};
    double motionless_disp_cm{0.5};

    /// Whole ticks covering @p ms (at least one).
    int ticks(double ms) const;
    bool operator==(const NavParams&) const = default;
};

/// Throws std::invalid_argument unless every field is positive (thresholds may be zero).
void validate(const NavParams& p);

enum class ControllerKind { Simple, Predictive };
std::string_view to_string(ControllerKind k);
ControllerKind controller_from_string(std::string_view s);

enum class Phase { Monitoring, Steering, PostSteerGrace, PreAccelGrace, Accelerating, PostAccelGrace };
std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

struct ControllerState {
    Phase phase{Phase::Monitoring};
    Side side{Side::Aligned}; ///< meaningful while Steering
    int phase_ticks{0};       ///< ticks already spent in the phase
    int steer_ticks{0};       ///< ticks since steering onset
    bool was_steering_last_loop{false};
    bool operator==(const ControllerState&) const = default;
};

/// Speed check performed without a fresh estimate.
class StaleSpeedError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Observation {
    double t_s{0.0};
    double D_cm{0.0};
    double gamma_deg{0.0};
    Side side{Side::Aligned};
};

struct TickOutput {
    StimulusCommand cmd;
    ControllerState next;
    std::optional<double> omega_sampled;
    std::optional<double> vl_sampled;
};

/// Target left => RightCercus (counterclockwise turn), right => LeftCercus, aligned => None.
StimulusCommand steer_direction(Side side);

TickOutput simple_tick(const ControllerState& ctrl, const Observation& obs, double D_t, const NavParams& params);

/// Throws StaleSpeedError if a check falls on this tick and @p speeds is
/// missing or older than t_v.
TickOutput predictive_tick(const ControllerState& ctrl, const Observation& obs, const std::optional<SpeedEstimate>& speeds,
                           double D_t, const NavParams& params);

TickOutput controller_tick(ControllerKind kind, const ControllerState& ctrl, const Observation& obs,
                           const std::optional<SpeedEstimate>& speeds, double D_t, const NavParams& params);

enum class TrialOutcome { Running, Success, ImmobileStimulated, ImmobileUnstimulated, Timeout };
std::string_view to_string(TrialOutcome o);
TrialOutcome outcome_from_string(std::string_view s);
inline bool is_failure(TrialOutcome o)
{
    return o == TrialOutcome::ImmobileStimulated || o == TrialOutcome::ImmobileUnstimulated ||
           o == TrialOutcome::Timeout;
}

struct TrialStatus {
    TrialOutcome outcome{TrialOutcome::Running};
    double elapsed_s{0.0};
    bool operator==(const TrialStatus&) const = default;
};

struct StatusSample {
    double t_s{0.0};
    double D_cm{0.0};
    Vec2 center;
    bool stimulus_active{false};
};

/// Status at the last sample of @p history. Success outranks immobility, which outranks timeout.
TrialStatus trial_status(std::span<const StatusSample> history, double D_t, const NavParams& params);

} // namespace biobot
