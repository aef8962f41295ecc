#include "doctest.h"

#include "biobot/config.hpp"
#include "biobot/kvfile.hpp"
#include "biobot/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace biobot;

namespace {

std::string error_of(std::string_view text)
{
    try {
        parse_config(text);
    } catch (const FormatError& e) {
        return e.what();
    }
    return {};
}

std::string temp_file(const std::string& name, const std::string& body)
{
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p.string();
}

} // namespace

TEST_CASE("empty config resolves to the navigation defaults")
{
    const RunConfig cfg = parse_config("");
    CHECK(cfg.setup.nav.gamma_t_deg == 25.0);
    CHECK(cfg.setup.nav.omega_t_dps == 5.0);
    CHECK(cfg.setup.nav.v_t_cmps == 2.0);
    CHECK(cfg.setup.nav.t_v_ms == 500.0);
    CHECK(cfg.setup.nav.d_a_ms == 2000.0);
    CHECK(cfg.setup.nav.d_s_ms == 2000.0);
    CHECK(cfg.setup.nav.tick_ms == 30.0);
    CHECK(cfg.terrain == TerrainKind::NoObstacle);
    CHECK(cfg.seeds.empty());
    CHECK(cfg.setup.behavior.base_speed_mean == BehaviorParams{}.base_speed_mean);
}

TEST_CASE("tick override is accepted and lands in the trajectory metadata")
{
    RunConfig cfg = parse_config("tick = 10\nseed = 4\n");
    CHECK(cfg.setup.nav.tick_ms == 10.0);
    const auto rec = run_trial(4, config_arena(cfg), cfg.algorithm, cfg.setup);
    CHECK(rec.tick_ms == 10.0);
    REQUIRE(rec.rows.size() > 2);
    CHECK(rec.rows[1].t_ms - rec.rows[0].t_ms == 10);
    const std::string csv = trajectory_csv(rec, {config_to_text(cfg), 4});
    const LogHeader h = read_log_header(csv);
    CHECK(h.meta.at("tick_ms") == "10");
    CHECK(h.config_text.find("tick = 10\n") != std::string::npos);
}

TEST_CASE("unknown keys and bad values are named")
{
    CHECK(error_of("gama_t = 30\n").find("gama_t") != std::string::npos);
    CHECK(error_of("gamma_t = wide\n").find("gamma_t") != std::string::npos);
    CHECK(error_of("cell_size = 4.5\n").find("cell_size") != std::string::npos);
    CHECK(error_of("behavior.flight_speed = 3\n").find("behavior.flight_speed") != std::string::npos);
    CHECK(error_of("terrain = Swamp\n").find("terrain") != std::string::npos);
    CHECK(error_of("seeds = 5..2\n").find("seeds") != std::string::npos);
    CHECK(error_of("[nav]\ngamma_t = 3\n").find("flat") != std::string::npos);
    CHECK(error_of("tick = -5\n") != "");
    CHECK_THROWS_AS(load_config("/nonexistent/biobot.cfg"), FormatError);
}

TEST_CASE("canonical text round-trips and drives the hash")
{
    const RunConfig a = parse_config("terrain = TallWall\nalgorithm = Simple\ngamma_t = 20\nbehavior.dash_gain = 2.5\n");
    const std::string text = config_to_text(a);
    CHECK(config_to_text(parse_config(text)) == text);
    CHECK(config_hash(parse_config(text)) == config_hash(a));
    RunConfig b = a;
    b.setup.nav.gamma_t_deg = 21.0;
    CHECK(config_hash(b) != config_hash(a));
    CHECK(hash_hex(0xabcULL) == "0000000000000abc");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("seeds: explicit lists or derived from the config")
{
    CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
    CHECK(parse_seed_list("1, 2,3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(parse_seed_list("3..6") == std::vector<std::uint64_t>{3, 4, 5, 6});
    CHECK_THROWS_AS(parse_seed_list("-1"), FormatError);
    CHECK_THROWS_AS(parse_seed_list(""), FormatError);

    const RunConfig a = parse_config("terrain = LowObstacle\n");
    const auto derived = resolved_seeds(a);
    REQUIRE(derived.size() == 1);
    CHECK(derived == resolved_seeds(parse_config("terrain = LowObstacle\n")));
    CHECK(derived != resolved_seeds(parse_config("terrain = TallWall\n")));
    CHECK(derived.front() <= 0xffffffffULL);
    CHECK(resolved_seeds(parse_config("terrain = LowObstacle\nseeds = 9 10\n")) == std::vector<std::uint64_t>{9, 10});
}

TEST_CASE("parameter files fold into the config; inline keys win")
{
    const std::string nav = temp_file("biobot_nav_test.params", "gamma_t = 30\nomega_t = 4\n");
    const RunConfig cfg = parse_config("omega_t = 6\nnav_params = " + nav + "\n");
    CHECK(cfg.setup.nav.gamma_t_deg == 30.0);
    CHECK(cfg.setup.nav.omega_t_dps == 6.0);
    CHECK(config_to_text(cfg).find("nav_params") == std::string::npos);

    const std::string bad = temp_file("biobot_nav_bad.params", "gamma = 30\n");
    CHECK_THROWS_AS(parse_config("nav_params = " + bad + "\n"), FormatError);
}

TEST_CASE("shipped behavior file holds the defaults")
{
    const BehaviorParams shipped = load_behavior_params(std::string(BIOBOT_DATA_DIR) + "/behavior_default.params");
    CHECK(behavior_params_to_text(shipped) == behavior_params_to_text(BehaviorParams{}));
    const RunConfig cfg =
        parse_config("behavior_params = " + std::string(BIOBOT_DATA_DIR) + "/behavior_default.params\n");
    CHECK(config_to_text(cfg) == config_to_text(parse_config("")));
}
