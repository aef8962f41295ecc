#pragma once
/**
 * @file harness.hpp
 * @brief Closed-loop trials, batches, failure taxonomy, calibration and power budget.
 */

#include "biobot/arena.hpp"
#include "biobot/insect.hpp"
#include "biobot/navigation.hpp"
#include "biobot/sensing.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace biobot {

struct TrialRow {
    int t_ms{0};
    Pose pose;
    Maneuver maneuver{Maneuver::FreeWalk};
    Stimulus cmd{Stimulus::None};
    Phase phase{Phase::Monitoring};
    double D_cm{0.0};
    double gamma_deg{0.0};
    Side side{Side::Aligned};
    std::optional<SpeedEstimate> speeds; ///< absent until the averaging window is filled
    std::optional<double> omega_sampled; ///< set on ticks where the controller checked omega
    std::optional<double> vl_sampled;    ///< set on ticks where the controller checked v_l
    double climb_height{0.0};
    bool operator==(const TrialRow&) const = default;
};

enum class AccelTrigger { Omega, LinearSpeed };
std::string_view to_string(AccelTrigger t);

struct AccelEvent {
    double t_s{0.0};
    Vec2 position;
    AccelTrigger trigger{AccelTrigger::Omega};
    bool operator==(const AccelEvent&) const = default;
};

enum class ClimbMode { None, Orthogonal, Edge };
std::string_view to_string(ClimbMode m);

struct TrialMetrics {
    std::optional<double> navigation_time_s; ///< successes only
    double backward_time_s{0.0};
    std::optional<double> first_climb_theta_deg;
    ClimbMode climb_mode{ClimbMode::None};
    std::vector<AccelEvent> accel_events;
    bool operator==(const TrialMetrics&) const = default;
};

struct TrialRecord {
    std::uint64_t seed{0};
    TerrainKind terrain{TerrainKind::NoObstacle};
    ControllerKind controller{ControllerKind::Simple};
    double tick_ms{30.0};
    std::vector<TrialRow> rows;
    TrialStatus status;
    TrialMetrics metrics;
};

/// Everything a trial depends on besides the seed.
struct TrialSetup {
    NavParams nav{};
    BehaviorParams behavior{};
    int physics_substeps{3};
    double start_heading_spread_deg{90.0}; ///< initial heading uniform within +-spread of the bearing to the target
};

/// Derived metrics, computed from rows only.
TrialMetrics compute_metrics(const std::vector<TrialRow>& rows, const TrialStatus& status, const Arena& arena,
                             double tick_ms);

TrialRecord run_trial(std::uint64_t seed, const Arena& arena, ControllerKind controller, const TrialSetup& setup);

enum class SpeedSource { Mocap, Imu };
std::string_view to_string(SpeedSource s);

struct LegOptions {
    SpeedSource speeds{SpeedSource::Mocap};
    ImuNoise imu_noise{};
    Rng* imu_rng{nullptr}; ///< required for SpeedSource::Imu
    double t0_s{0.0};      ///< clock offset passed to the observer
    /// Called at the start of every tick with the offset time and the current agent.
    std::function<void(double t_s, const AgentState& agent)> observer;
};

/// Closed loop from @p agent toward @p target until the leg terminates. Row times start at zero;
/// @p agent is left at its final state. run_trial is spawn + one mocap leg to the destination.
TrialRecord run_leg(AgentState& agent, const Disc& target, const Arena& arena, ControllerKind controller,
                    const TrialSetup& setup, Rng& rng, const LegOptions& opts = {});

/// Throws std::invalid_argument unless the record ended in failure.
struct FailureContext {
    TrialOutcome reason{TrialOutcome::Timeout};
    std::optional<double> theta_at_end_deg;
    double stimulated_fraction_final_window{0.0};
    double backward_time_s{0.0};
};
FailureContext classify_failure(const TrialRecord& record, const Arena& arena, const NavParams& nav);

struct MeanSd {
    std::size_t n{0};
    double mean{0.0};
    std::optional<double> sd; ///< absent when n < 2
};
MeanSd mean_sd(const std::vector<double>& xs);

struct BatchStats {
    std::size_t n{0};
    std::size_t successes{0};
    double success_rate{0.0};
    MeanSd navigation_time;
    MeanSd backward_time;
    MeanSd backward_time_timeouts;
    std::size_t immobile_stimulated{0};
    std::size_t immobile_unstimulated{0};
    std::size_t timeouts{0};
    std::size_t climb_orthogonal{0};
    std::size_t climb_edge{0};
    std::size_t climb_none{0};
    MeanSd theta_orthogonal;
    MeanSd theta_edge;
    std::size_t accel_omega{0};
    std::size_t accel_linear{0};
};

/// Aggregates records; the result does not depend on record order.
BatchStats aggregate(const std::vector<TrialRecord>& records);

/// Runs one trial per seed on a worker pool; records come back in seed order.
std::vector<TrialRecord> run_batch(const std::vector<std::uint64_t>& seeds, const Arena& arena,
                                   ControllerKind controller, const TrialSetup& setup, unsigned threads = 0);

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t n);

/// Checks every Predictive acceleration event against its triggering sample. Returns the first violation.
std::optional<std::string> check_accel_provenance(const TrialRecord& record, const NavParams& nav);

// Calibration

enum class CalibStat {
    TallSimpleSuccess,
    TallPredictiveSuccess,
    LowSimpleSuccess,
    LowPredictiveSuccess,
    TallSimpleNavTime,
    TallPredictiveNavTime,
    TallBackwardRatio,
    TimeoutBackwardTime,
    OrthogonalTheta,
    EdgeTheta,
    OrthogonalShare,
    OpenPredictiveSuccess,
};
std::string_view to_string(CalibStat s);
CalibStat calib_stat_from_string(std::string_view s);

struct CalibTarget {
    CalibStat stat{CalibStat::TallSimpleSuccess};
    double value{0.0};
    double tolerance{1.0};
    bool mandatory{true};
};

struct CalibSearch {
    std::vector<std::string> params;       ///< BehaviorParams names to vary
    std::vector<std::pair<double, double>> bounds;
    int random_samples{8};
    int descent_rounds{2};
    int trials_per_eval{50};
    std::uint64_t seed{1};
};

struct CalibResult {
    BehaviorParams params;
    double misfit{0.0};
    std::vector<std::pair<CalibTarget, double>> achieved;
    bool mandatory_met{true};
    int evaluations{0};
};

/// Statistic values under @p setup over @p trials paired seeds.
std::vector<double> evaluate_stats(const std::vector<CalibStat>& stats, const TrialSetup& setup, int trials,
                                   std::uint64_t seed);

/// Random search then coordinate descent; deterministic given search.seed. Empty targets return @p start unchanged.
CalibResult calibrate(const std::vector<CalibTarget>& targets, const CalibSearch& search, const TrialSetup& start);

/// Published aggregates as calibration targets.
std::vector<CalibTarget> default_calibration_targets();

// Power

struct PowerComponent {
    std::string name;
    double active_mw{0.0};
    double duty{1.0};
    double sleep_mw{0.0};

    double average_mw() const { return active_mw * duty + sleep_mw * (1.0 - duty); }
};

struct Battery {
    double capacity_mah{120.0};
    double voltage_v{3.7};
};

struct PowerBudget {
    std::vector<PowerComponent> components;
    Battery battery;
    double total_mw{0.0};
    double endurance_h{0.0};
};

PowerBudget power_budget(const std::vector<PowerComponent>& components, const Battery& battery);
/// Backpack components summing to the reported 205.5 mW.
std::vector<PowerComponent> default_power_components();

} // namespace biobot
