#pragma once
/**
 * @file mission.hpp
 * @brief Multi-waypoint search mission with concurrent thermal human detection.
 *
 * The agent visits every arena target in order and then returns to the origin,
 * one Predictive leg per target with IMU-derived speeds. A frame is rendered
 * from the agent's pose at a fixed period and run through the detector.
 */

#include "biobot/detection.hpp"
#include "biobot/harness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

/// A subject placed in the arena. Subjects are not obstacles.
struct MissionSubject {
    std::string name;        ///< unique instance name
    std::string template_id; ///< catalog entry
    Vec2 position;           ///< cm, arena frame
    double facing_deg{0.0};  ///< direction the subject's front faces
};

struct MissionScenario {
    std::string name{"mission"};
    Arena arena{build_terrain(TerrainKind::NoObstacle)};
    std::vector<MissionSubject> subjects;
    std::uint64_t seed{1};
    double ambient_c{26.0};
    double ambient_sd{0.3};
    double noise_sd{0.2};
    double salt_pepper{0.01};
    double camera_height_cm{3.0};
    double frame_period_s{1.0};
    double leg_limit_s{300.0};
    double flag_range_m{1.5}; ///< a human counts as found when flagged at or within this range
    double min_range_m{0.2};  ///< closer subjects are rendered at this range
};

MissionScenario scenario_from_text(std::string_view text, std::string_view source = "<scenario>");
MissionScenario load_scenario(const std::string& path);
std::string scenario_to_text(const MissionScenario& s);

struct VisibleSubject {
    std::string name;
    bool human{false};
    double distance_m{0.0};
    double bearing_deg{0.0};
    bool operator==(const VisibleSubject&) const = default;
};

struct DetectionLogEntry {
    double t_s{0.0};
    Pose pose;
    bool gate_active{false};
    int hot_count{0};
    std::optional<double> score;
    DetectionLabel label{DetectionLabel::NoCandidate};
    std::vector<VisibleSubject> visible;
    bool operator==(const DetectionLogEntry&) const = default;
};

struct MissionLeg {
    Disc target;
    bool return_leg{false};
    double t0_s{0.0};
    TrialRecord record;
};

struct MissionRecord {
    std::uint64_t seed{0};
    std::vector<MissionLeg> legs;
    std::vector<DetectionLogEntry> detections;
    std::size_t accel_omega{0};
    std::size_t accel_linear{0};
    bool completed{false}; ///< every leg succeeded
    double duration_s{0.0};
};

/// Subjects that cover at least one pixel of a frame taken from @p camera.
std::vector<VisibleSubject> visible_subjects(const MissionScenario& scenario, const Pose& camera);

/// Renders the frame seen from @p camera. Draws sensor noise from @p rng.
ThermalImage mission_frame(const MissionScenario& scenario, const Pose& camera, double t_s, Rng& rng);

/// Stops at the first failed leg. Throws std::invalid_argument for an arena without targets.
MissionRecord run_mission(const MissionScenario& scenario, const SvmModel& model, const TrialSetup& setup);

struct HumanFinding {
    std::string name;
    bool flagged{false};          ///< labelled Human while visible within flag range
    std::optional<double> closest_m;
    std::size_t flagged_frames{0};
};

struct MissionReport {
    std::size_t waypoints{0};
    std::size_t waypoints_reached{0};
    bool returned{false};
    std::vector<HumanFinding> humans;
    std::size_t frames{0};
    std::size_t gate_activations{0};
    std::size_t human_labels{0};
    std::size_t hot_only_frames{0};        ///< a hot object visible, no human visible
    std::size_t hot_only_human_labels{0};
    std::size_t accel_omega{0};
    std::size_t accel_linear{0};
    std::optional<std::string> provenance_violation;
};

MissionReport mission_report(const MissionRecord& record, const MissionScenario& scenario, const NavParams& nav);

/// The demonstration passes when every leg succeeded, every human was found, no hot-object-only frame
/// was labelled Human and every acceleration traces to a below-threshold sample.
bool mission_passed(const MissionReport& r);

} // namespace biobot
