#pragma once
/**
 * @file comparison.hpp
 * @brief Terrain x algorithm batch grids and the pass/fail bands checked on them.
 */

#include "biobot/harness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace biobot {

struct ComparisonCell {
    TerrainKind terrain{TerrainKind::NoObstacle};
    ControllerKind controller{ControllerKind::Simple};
    std::vector<TrialRecord> records;
    BatchStats stats;
};

/// Paired seeds: every cell runs the same seed list.
std::vector<ComparisonCell> run_comparison(const std::vector<TerrainKind>& terrains,
                                           const std::vector<ControllerKind>& controllers,
                                           const std::vector<std::uint64_t>& seeds, const TrialSetup& setup,
                                           unsigned threads = 0);

const ComparisonCell* find_cell(const std::vector<ComparisonCell>& cells, TerrainKind t, ControllerKind c);

struct Criterion {
    std::string name;
    std::string detail;
    bool pass{false};
};

/// Success-rate and navigation-time bands; skipped when a needed cell is missing.
std::vector<Criterion> terrain_criteria(const std::vector<ComparisonCell>& cells);
/// TallWall mean backward time, Simple over Predictive, at least 3.
std::vector<Criterion> backward_criteria(const std::vector<ComparisonCell>& cells);
/// LowObstacle climb statistics pooled over algorithms; needs at least @p min_climbs climbing trials.
std::vector<Criterion> climb_criteria(const std::vector<ComparisonCell>& cells, std::size_t min_climbs = 100);
/// Predictive success >= Simple success on every terrain present.
std::vector<Criterion> dominance_criteria(const std::vector<ComparisonCell>& cells);

std::string comparison_table(const std::vector<ComparisonCell>& cells);

} // namespace biobot
