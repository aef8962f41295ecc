#pragma once
/**
 * @file insect.hpp
 * @brief Stochastic kinematic cockroach agent.
 *
 * Unicycle kinematics (position + heading, signed forward speed) with a
 * small set of maneuvers. Every random draw comes from the caller's Rng, so
 * `advance` is a pure transition on (state, command, arena, dt, stream).
 *
 * Free parameters live in BehaviorParams; their defaults are the values in
 * data/behavior_default.params produced by `biobot calibrate`.
 */

#include "biobot/arena.hpp"
#include "biobot/rng.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biobot {

enum class Maneuver { FreeWalk, Turning, Dashing, WallFollow, Climbing, Backward, Stopped };
enum class Stimulus { None, LeftCercus, RightCercus, Accelerate };

std::string_view to_string(Maneuver m);
std::string_view to_string(Stimulus s);
Maneuver maneuver_from_string(std::string_view s);
Stimulus stimulus_from_string(std::string_view s);

/// Electrical waveform of the stimulator; logged, never simulated.
struct Waveform {
    double frequency_hz{40.0};
    double duty_cycle{0.5};
    double amplitude_min_v{6.0};
    double amplitude_max_v{8.0};
    bool operator==(const Waveform&) const = default;
};

struct StimulusCommand {
    Stimulus kind{Stimulus::None};
    Waveform waveform{};

    bool active() const { return kind != Stimulus::None; }
    bool steering() const { return kind == Stimulus::LeftCercus || kind == Stimulus::RightCercus; }
    bool operator==(const StimulusCommand&) const = default;
};

/// Piecewise-linear curve through (x, y) knots, clamped at both ends.
struct PiecewiseCurve {
    std::vector<std::pair<double, double>> knots;

    double operator()(double x) const;
    std::string to_text() const;
    static PiecewiseCurve from_text(std::string_view text, std::string_view key);
    bool operator==(const PiecewiseCurve&) const = default;
};

struct BehaviorParams {
    double body_length{5.7};            // cm
    double base_speed_mean{3.0};        // cm/s, per-episode cruise speed
    double base_speed_sd{0.35};         // cm/s
    double min_cruise_speed{2.3};       // cm/s, floor on the sampled cruise speed
    double speed_fluct_sd{0.2};         // cm/s, stationary sd of the within-episode OU fluctuation
    double speed_fluct_tau{1.5};        // s
    double heading_jitter{8.0};         // deg/sqrt(s)
    double stim_turn_rate{60.0};        // deg/s
    double turn_speed_factor{0.85};     // speed multiplier while turning
    double dash_gain{2.0};              // speed multiplier under Accelerate
    double dash_speed_floor{5.0};       // cm/s
    double stop_hazard_free{0.0005};     // 1/s, open field, unstimulated
    double stop_hazard_at_wall{0.2};    // 1/s, at a wall, unstimulated
    double resume_hazard{0.03};         // 1/s, stopped and unstimulated
    double resume_hazard_stim{0.08};    // 1/s, stopped under steering stimulation
    double wall_proximity{0.5};         // cm, clearance counted as "at the wall"
    double wallfollow_bias{30.0};       // deg/s toward the wall tangent
    double blocked_turn_factor{0.1};    // fraction of a turn into a wall that still happens
    double block_reaction_mean{3.5};    // s, time pressed under steering before reacting
    double block_reaction_sd{1.0};      // s
    double backward_trigger_prob{0.6}; // reaction is Backward (else Stopped)
    double backward_speed_mean{1.5};    // cm/s
    double backward_speed_sd{0.3};      // cm/s
    double backward_duration_mean{6.0}; // s
    double backward_duration_sd{2.5};   // s
    double backward_turn_factor{0.5};   // steering turn-rate multiplier while backing
    double wallfollow_persist{1.0};     // s of wall following after Accelerate ends
    double wall_hug_deg{5.0};           // deg into the wall while wall following
    double wallfollow_turn_rate{360.0}; // deg/s, alignment rate while wall following
    PiecewiseCurve climb_prob_vs_theta{{{0.0, 0.0}, {30.0, 0.02}, {45.0, 0.15}, {55.0, 0.5},
                                        {65.0, 0.85}, {75.0, 0.93}, {90.0, 0.97}}};
    double noclimb_prob{0.02};          // refuse to climb regardless of angle
    double contact_turn_sd{20.0};       // deg, antennal reorientation on first touching a low obstacle
    double edge_follow_mean{2.0};       // s along the edge before climbing from the side
    double edge_follow_sd{0.8};         // s
    double edge_climb_angle_mean{39.0}; // deg between body and edge at a side climb
    double edge_climb_angle_sd{6.5};    // deg
    double climb_speed{1.5};            // cm/s
    double climb_rear_time{0.4};        // s spent rearing before moving onto the obstacle
    double climb_clearance{1.2};        // cm, anterior elevation above the top surface

    bool operator==(const BehaviorParams&) const = default;
};

/// Names of every scalar parameter, in file order.
const std::vector<std::string_view>& behavior_param_names();
double* behavior_param(BehaviorParams& p, std::string_view name);
const double* behavior_param(const BehaviorParams& p, std::string_view name);
/// Throws std::invalid_argument naming the first violated invariant.
void validate(const BehaviorParams& p);

std::string behavior_params_to_text(const BehaviorParams& p, std::string_view header = {});
BehaviorParams behavior_params_from_text(std::string_view text, std::string_view source = "<behavior>");
BehaviorParams load_behavior_params(const std::string& path);

enum class ClimbOutcome { ClimbOver, EdgeFollowThenClimb, NoClimb };
std::string_view to_string(ClimbOutcome c);

struct SegmentDecision {
    std::size_t segment{0};
    ClimbOutcome outcome{ClimbOutcome::ClimbOver};
    bool operator==(const SegmentDecision&) const = default;
};

struct AgentState {
    Pose pose;
    double speed{0.0};         ///< |v|, cm/s
    double forward_speed{0.0}; ///< signed v_f, negative while Backward
    Maneuver maneuver{Maneuver::FreeWalk};
    double climb_height{0.0};  ///< anterior elevation above the floor, cm
    double time_in_maneuver{0.0};

    double cruise_speed{3.0};
    double speed_noise{0.0};
    double maneuver_duration{0.0};
    int wall_dir{0};                          ///< +1 / -1 along the current wall tangent, 0 = none
    std::optional<std::size_t> wall_segment;  ///< segment the wall_dir refers to
    bool wall_is_boundary{false};
    bool edge_follow{false};
    std::optional<std::size_t> climb_segment;
    int climb_start_side{0}; ///< side of the climbed segment's line the centre started on
    double blocked_time{0.0};
    double block_reaction_delay{-1.0};
    double backward_speed{0.0};
    std::vector<SegmentDecision> decisions;

    bool operator==(const AgentState&) const = default;
};

/// Fresh agent at @p pose; samples the episode cruise speed.
AgentState spawn_agent(const Pose& pose, const BehaviorParams& params, Rng& rng);

ClimbOutcome climb_outcome(double theta_deg, const ObstacleSegment& segment, const BehaviorParams& params, Rng& rng);

/// Maneuver transition caused by a wall contact. No contact leaves the state unchanged.
AgentState wall_response(const AgentState& state, const std::optional<Contact>& contact, const StimulusCommand& cmd,
                         const Arena& arena, const BehaviorParams& params, double dt, Rng& rng);

/// One integration step. Throws std::invalid_argument unless dt is in (0, 0.1].
AgentState advance(const AgentState& state, const StimulusCommand& cmd, const Arena& arena, double dt,
                   const BehaviorParams& params, Rng& rng);

/// Skin distance within which a body counts as touching a wall.
inline constexpr double kContactSkin = 0.02;

/// Deepest contact with an obstacle (except @p ignore) or the boundary.
std::optional<Contact> wall_contact(const Pose& pose, const Arena& arena, double body_length,
                                    std::optional<std::size_t> ignore, double skin);

/// True if the contact blocks motion (tall wall, boundary, or a refused climb).
bool is_blocking(const Contact& c, const Arena& arena, const AgentState& state);

} // namespace biobot
