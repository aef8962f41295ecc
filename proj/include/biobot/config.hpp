#pragma once
/**
 * @file config.hpp
 * @brief Flat key = value run configuration shared by every CLI command.
 *
 * A resolved config is self-contained: parameter files it names are read
 * once and their values folded in, so the canonical text alone reproduces
 * a run. See docs/formats.md for the key list.
 */

#include "biobot/arena.hpp"
#include "biobot/detection.hpp"
#include "biobot/harness.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

struct RunConfig {
    TerrainKind terrain{TerrainKind::NoObstacle};
    std::string arena_path; ///< overrides the preset terrain when set
    ControllerKind algorithm{ControllerKind::Predictive};
    TrialSetup setup{};
    std::vector<std::uint64_t> seeds; ///< empty: derived from the config hash
    std::string recipe_path;
    std::string model_path;
    std::string scenario_path;
    std::string output_dir{"out"};
    int cell_size{4};
    KernelKind kernel{KernelKind::Linear};
    double svm_c{1.0};
    int svm_epochs{60};
};

/// Every key parse_config accepts, behavior.* names excluded.
const std::vector<std::string_view>& config_keys();

/// Applies one key. Throws FormatError naming the key on an unknown key or a bad value.
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value, std::string_view source = "<config>");

/// Flat key = value text; parameter-file keys are applied before the rest. Relative paths stay as written.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical text: every resolved value, one key per line, fixed order.
std::string config_to_text(const RunConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

/// Explicit seeds, or one seed derived from the hash of the seedless config.
std::vector<std::uint64_t> resolved_seeds(const RunConfig& cfg);

/// "7", "1 2 3" or "1..50".
std::vector<std::uint64_t> parse_seed_list(std::string_view text, std::string_view key = "seeds");

/// Preset terrain or the arena file.
Arena config_arena(const RunConfig& cfg);

} // namespace biobot
