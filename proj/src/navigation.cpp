#include "biobot/navigation.hpp"

#include "biobot/kvfile.hpp"

#include <cmath>
#include <string>

namespace biobot {

int NavParams::ticks(double ms) const
{
    return std::max(1, static_cast<int>(std::ceil(ms / tick_ms - 1e-9)));
}

void validate(const NavParams& p)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be positive");
    };
    auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be non-negative");
    };
    non_negative(p.gamma_t_deg, "gamma_t");
    non_negative(p.omega_t_dps, "omega_t");
    non_negative(p.v_t_cmps, "v_t");
    positive(p.t_v_ms, "t_v");
    positive(p.t_f1_ms, "t_f1");
    positive(p.t_f2_ms, "t_f2");
    positive(p.t_f3_ms, "t_f3");
    positive(p.d_a_ms, "d_a");
    positive(p.d_s_ms, "d_s");
    positive(p.tick_ms, "tick");
    positive(p.trial_limit_s, "trial_limit");
    positive(p.motionless_window_s, "motionless_window");
    positive(p.motionless_disp_cm, "motionless_disp");
}

std::string_view to_string(ControllerKind k) { return k == ControllerKind::Simple ? "Simple" : "Predictive"; }

ControllerKind controller_from_string(std::string_view s)
{
    if (s == "Simple" || s == "simple")
        return ControllerKind::Simple;
    if (s == "Predictive" || s == "predictive")
        return ControllerKind::Predictive;
    throw FormatError("unknown controller '" + std::string(s) + "' (expected Simple or Predictive)");
}

std::string_view to_string(Phase p)
{
    switch (p) {
    case Phase::Monitoring: return "Monitoring";
    case Phase::Steering: return "Steering";
    case Phase::PostSteerGrace: return "PostSteerGrace";
    case Phase::PreAccelGrace: return "PreAccelGrace";
    case Phase::Accelerating: return "Accelerating";
    case Phase::PostAccelGrace: return "PostAccelGrace";
    }
    return "?";
}

Phase phase_from_string(std::string_view s)
{
    for (auto p : {Phase::Monitoring, Phase::Steering, Phase::PostSteerGrace, Phase::PreAccelGrace,
                   Phase::Accelerating, Phase::PostAccelGrace})
        if (to_string(p) == s)
            return p;
    throw FormatError("unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(TrialOutcome o)
{
    switch (o) {
    case TrialOutcome::Running: return "Running";
    case TrialOutcome::Success: return "Success";
    case TrialOutcome::ImmobileStimulated: return "ImmobileStimulated";
    case TrialOutcome::ImmobileUnstimulated: return "ImmobileUnstimulated";
    case TrialOutcome::Timeout: return "Timeout";
    }
    return "?";
}

TrialOutcome outcome_from_string(std::string_view s)
{
    for (auto o : {TrialOutcome::Running, TrialOutcome::Success, TrialOutcome::ImmobileStimulated,
                   TrialOutcome::ImmobileUnstimulated, TrialOutcome::Timeout})
        if (to_string(o) == s)
            return o;
    throw FormatError("unknown trial outcome '" + std::string(s) + "'");
}

StimulusCommand steer_direction(Side side)
{
    switch (side) {
    case Side::Left: return {Stimulus::RightCercus};
    case Side::Right: return {Stimulus::LeftCercus};
    case Side::Aligned: break;
    }
    return {Stimulus::None};
}

namespace {

// gamma > gamma_t with an Aligned side means the target is dead behind; turn counterclockwise.
Side steering_side(const Observation& obs) { return obs.side == Side::Aligned ? Side::Left : obs.side; }

ControllerState entered(Phase p, const ControllerState& from)
{
    ControllerState s;
    s.phase = p;
    s.side = from.side;
    s.steer_ticks = from.steer_ticks;
    s.was_steering_last_loop = from.phase == Phase::Steering;
    return s;
}

ControllerState start_steering(const ControllerState& from, Side side)
{
    ControllerState s = entered(Phase::Steering, from);
    s.side = side;
    s.steer_ticks = 0;
    return s;
}

const SpeedEstimate& fresh(const std::optional<SpeedEstimate>& speeds, const Observation& obs, const NavParams& p,
                           const char* what)
{
    if (!speeds)
        throw StaleSpeedError(std::string(what) + " check at t=" + std::to_string(obs.t_s) + " s without an estimate");
    if (obs.t_s - speeds->timestamp_s > p.t_v_ms / 1000.0 + 1e-9)
        throw StaleSpeedError(std::string(what) + " estimate older than t_v at t=" + std::to_string(obs.t_s) + " s");
    return *speeds;
}

TickOutput finish(TickOutput out)
{
    out.next.phase_ticks += 1;
    if (out.next.phase == Phase::Steering)
        out.next.steer_ticks += 1;
    return out;
}

} // namespace

TickOutput simple_tick(const ControllerState& ctrl, const Observation& obs, double D_t, const NavParams& params)
{
    TickOutput out;
    out.next = ctrl;
    if (obs.D_cm <= D_t)
        return out;
    if (obs.gamma_deg > params.gamma_t_deg) {
        const Side side = steering_side(obs);
        out.next = ctrl.phase == Phase::Steering ? ctrl : start_steering(ctrl, side);
        out.next.side = side;
        out.cmd = steer_direction(side);
    } else if (ctrl.phase != Phase::Monitoring) {
        out.next = entered(Phase::Monitoring, ctrl);
    }
    return finish(out);
}

TickOutput predictive_tick(const ControllerState& ctrl, const Observation& obs,
                           const std::optional<SpeedEstimate>& speeds, double D_t, const NavParams& p)
{
    TickOutput out;
    out.next = ctrl;
    if (obs.D_cm <= D_t)
        return out;

    ControllerState s = ctrl;
    // Timed phases hand over once their tick budget is used up.
    if (s.phase == Phase::PreAccelGrace && s.phase_ticks >= p.ticks(p.t_f1_ms))
        s = entered(Phase::Accelerating, s);
    else if (s.phase == Phase::Accelerating && s.phase_ticks >= p.ticks(p.d_a_ms))
        s = entered(Phase::PostAccelGrace, s);
    else if (s.phase == Phase::PostAccelGrace && s.phase_ticks >= p.ticks(p.t_f2_ms))
        s = entered(Phase::Monitoring, s);
    else if (s.phase == Phase::PostSteerGrace && s.phase_ticks >= p.ticks(p.t_f3_ms))
        s = entered(Phase::Monitoring, s);

    const bool wants_steer = obs.gamma_deg > p.gamma_t_deg;
    switch (s.phase) {
    case Phase::PreAccelGrace:
    case Phase::PostAccelGrace:
        out.next = s;
        return finish(out);
    case Phase::Accelerating:
        out.next = s;
        out.cmd = {Stimulus::Accelerate};
        return finish(out);
    case Phase::Monitoring:
    case Phase::PostSteerGrace:
        if (wants_steer) {
            const Side side = steering_side(obs);
            out.next = start_steering(s, side);
            out.cmd = steer_direction(side);
            return finish(out);
        }
        out.next = s;
        if (s.phase == Phase::Monitoring && s.phase_ticks > 0 && s.phase_ticks % p.ticks(p.t_v_ms) == 0) {
            const double vl = fresh(speeds, obs, p, "v_l").vl_cmps;
            out.vl_sampled = vl;
            if (vl < p.v_t_cmps) {
                out.next = entered(Phase::Accelerating, s);
                out.cmd = {Stimulus::Accelerate};
            }
        }
        return finish(out);
    case Phase::Steering: {
        if (!wants_steer) {
            out.next = entered(Phase::PostSteerGrace, s);
            return finish(out);
        }
        out.next = s;
        out.next.side = steering_side(obs);
        out.cmd = steer_direction(out.next.side);
        const int first = p.ticks(p.d_s_ms) + (p.ticks(p.d_s_ms) * p.tick_ms <= p.d_s_ms ? 1 : 0);
        const int k = s.steer_ticks;
        if (k >= first && (k - first) % p.ticks(p.t_v_ms) == 0) {
            const double w = fresh(speeds, obs, p, "omega").omega_dps;
            out.omega_sampled = w;
            if (std::abs(w) < p.omega_t_dps) {
                out.next = entered(Phase::PreAccelGrace, s);
                out.cmd = {};
            }
        }
        return finish(out);
    }
    }
    return finish(out);
}

TickOutput controller_tick(ControllerKind kind, const ControllerState& ctrl, const Observation& obs,
                           const std::optional<SpeedEstimate>& speeds, double D_t, const NavParams& params)
{
    return kind == ControllerKind::Simple ? simple_tick(ctrl, obs, D_t, params)
                                          : predictive_tick(ctrl, obs, speeds, D_t, params);
}

TrialStatus trial_status(std::span<const StatusSample> history, double D_t, const NavParams& params)
{
    if (history.empty())
        throw std::invalid_argument("trial_status: empty history");
    const StatusSample& last = history.back();
    TrialStatus st{TrialOutcome::Running, last.t_s};
    if (last.D_cm <= D_t) {
        st.outcome = TrialOutcome::Success;
        return st;
    }
    const double window_start = last.t_s - params.motionless_window_s;
    std::size_t first = history.size();
    for (std::size_t i = history.size(); i-- > 0;)
        if (history[i].t_s <= window_start + 1e-9) {
            first = i;
            break;
        }
    if (first < history.size()) {
        const Vec2 anchor = history[first].center;
        bool still = true;
        std::size_t stimulated = 0;
        for (std::size_t i = first; i < history.size() && still; ++i) {
            still = distance(history[i].center, anchor) < params.motionless_disp_cm;
            stimulated += history[i].stimulus_active ? 1 : 0;
        }
        if (still) {
            const std::size_t n = history.size() - first;
            st.outcome = 2 * stimulated > n ? TrialOutcome::ImmobileStimulated : TrialOutcome::ImmobileUnstimulated;
            return st;
        }
    }
    if (last.t_s > params.trial_limit_s + 1e-9)
        st.outcome = TrialOutcome::Timeout;
    return st;
}

} // namespace biobot
