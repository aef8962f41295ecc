#pragma once
/**
 * @file plot.hpp
 * @brief Self-contained SVG figures: trajectories, batch comparisons, detection timelines.
 */

#include "biobot/harness.hpp"
#include "biobot/mission.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace biobot {

/// Colour class of a row: free (black), steer-left (green), steer-right (red), accel (cyan).
std::string_view phase_class(const TrialRow& row);

/// One `<path class="segment ...">` per run of rows sharing a colour class; triangles where a
/// sampled omega (blue) or v_l (pink) fell below its threshold. Throws std::invalid_argument on no rows.
std::string svg_trajectory(const std::vector<TrialRow>& rows, const Arena& arena, const NavParams& nav,
                           std::string_view title = {});
std::string svg_trajectory(const MissionRecord& rec, const Arena& arena, const NavParams& nav,
                           std::string_view title = {});

struct BatchBar {
    std::string group;  ///< e.g. terrain
    std::string series; ///< e.g. algorithm
    double success_rate{0.0};
    MeanSd navigation_time;
};

/// Success-rate panel plus navigation-time panel with sd whiskers; one bar per entry in each.
std::string svg_batch_bars(const std::vector<BatchBar>& bars, std::string_view title = {});

/// In-band pixel count curve, gate threshold line and classifier score dots.
std::string svg_detection_timeline(const std::vector<DetectionLogEntry>& frames, std::string_view title = {});

} // namespace biobot
