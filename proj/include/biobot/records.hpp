#pragma once
/**
 * @file records.hpp
 * @brief CSV logs for trials, batches and missions, with embedded provenance.
 *
 * Every file starts with '#' lines: a format tag, `config_hash`, `seed`, then
 * record metadata and the full canonical config as `config: key = value`
 * lines. Numbers use the shortest text that reads back to the same double.
 */

#include "biobot/config.hpp"
#include "biobot/harness.hpp"
#include "biobot/mission.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

inline constexpr std::string_view kTrajectoryHeader =
    "t_ms,x_cm,y_cm,heading_deg,maneuver,cmd,phase,D_cm,gamma_deg,side,omega_dps,vl_cmps,vf_cmps";
inline constexpr std::string_view kDetectionHeader = "t_s,gate_active,hot_count,score,label";
inline constexpr std::string_view kBatchHeader =
    "seed,terrain,algorithm,outcome,elapsed_s,navigation_time_s,backward_time_s,first_climb_theta_deg,climb_mode,"
    "accel_omega,accel_v_l";

struct Provenance {
    std::string config_text; ///< canonical config
    std::uint64_t seed{0};

    std::uint64_t hash() const { return fnv1a64(config_text); }
};

/// Provenance lines of a log file.
struct LogHeader {
    std::string format;
    std::string config_hash;
    std::uint64_t seed{0};
    std::map<std::string, std::string> meta;
    std::string config_text;
};

std::string trajectory_csv(const TrialRecord& rec, const Provenance& prov);

/// Reads a trajectory CSV back. Sampled-check columns are not logged, so those row fields stay empty.
TrialRecord read_trajectory_csv(std::string_view text, std::string_view source = "<trajectory>");
/// Rows of a trial or mission trajectory CSV.
std::vector<TrialRow> read_trajectory_rows(std::string_view text, std::string_view source = "<trajectory>");

/// Mission legs joined on the mission clock; each later leg's first row repeats the previous end and is dropped.
std::string mission_trajectory_csv(const MissionRecord& rec, const Provenance& prov);
std::string detection_csv(const MissionRecord& rec, const Provenance& prov);
std::vector<DetectionLogEntry> read_detection_csv(std::string_view text, std::string_view source = "<detections>");

std::string batch_csv(const std::vector<TrialRecord>& records, const Provenance& prov,
                      const std::vector<std::pair<std::string, std::string>>& meta = {});
/// Per-trial summaries back from a batch CSV. Rows and accel event positions are not logged.
std::vector<TrialRecord> read_batch_csv(std::string_view text, std::string_view source = "<batch>");

/// Header lines of any log; throws FormatError when the provenance lines are missing.
LogHeader read_log_header(std::string_view text, std::string_view source = "<log>");

/// Human-readable batch summary.
std::string batch_summary(const BatchStats& s, std::string_view title);

} // namespace biobot
