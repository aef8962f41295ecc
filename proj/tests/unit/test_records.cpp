#include "doctest.h"

#include "biobot/kvfile.hpp"
#include "biobot/records.hpp"

#include <sstream>

using namespace biobot;

namespace {

Provenance prov_for(const RunConfig& cfg, std::uint64_t seed)
{
    RunConfig c = cfg;
    c.seeds = {seed};
    return {config_to_text(c), seed};
}

std::size_t data_lines(const std::string& csv)
{
    std::istringstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        n += !line.empty() && line[0] != '#';
    return n - 1; // column header
}

} // namespace

TEST_CASE("trajectory CSV round trip reproduces derived metrics")
{
    RunConfig cfg = parse_config("");
    for (auto terrain : {TerrainKind::LowObstacle, TerrainKind::TallWall}) {
        const Arena arena = build_terrain(terrain);
        for (auto kind : {ControllerKind::Simple, ControllerKind::Predictive}) {
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                cfg.terrain = terrain;
                cfg.algorithm = kind;
                const TrialRecord rec = run_trial(seed, arena, kind, cfg.setup);
                const std::string csv = trajectory_csv(rec, prov_for(cfg, seed));
                const TrialRecord back = read_trajectory_csv(csv);
                CHECK(back.seed == seed);
                CHECK(back.terrain == terrain);
                CHECK(back.controller == kind);
                CHECK(back.status == rec.status);
                REQUIRE(back.rows.size() == rec.rows.size());
                for (std::size_t i = 0; i < rec.rows.size(); ++i) {
                    CHECK(back.rows[i].pose == rec.rows[i].pose);
                    CHECK(back.rows[i].D_cm == rec.rows[i].D_cm);
                    CHECK(back.rows[i].phase == rec.rows[i].phase);
                    CHECK(back.rows[i].speeds.has_value() == rec.rows[i].speeds.has_value());
                }
                CHECK(compute_metrics(back.rows, back.status, arena, back.tick_ms) == rec.metrics);
                CHECK(trajectory_csv(back, prov_for(cfg, seed)).size() > 0);
            }
        }
    }
}

TEST_CASE("every log carries hash and seed of its embedded config")
{
    RunConfig cfg = parse_config("terrain = TallWall\n");
    const auto rec = run_trial(5, build_terrain(TerrainKind::TallWall), cfg.algorithm, cfg.setup);
    const Provenance p = prov_for(cfg, 5);
    for (const std::string& csv : {trajectory_csv(rec, p), batch_csv({rec}, p)}) {
        const LogHeader h = read_log_header(csv);
        CHECK(h.seed == 5);
        CHECK(h.config_text == p.config_text);
        CHECK(h.config_hash == hash_hex(fnv1a64(h.config_text)));
        CHECK(config_to_text(parse_config(h.config_text)) == p.config_text);
    }
    CHECK_THROWS_AS(read_log_header("t_ms,x\n1,2\n"), FormatError);
}

TEST_CASE("rerunning from the embedded config is byte-identical")
{
    RunConfig cfg = parse_config("terrain = LowObstacle\nalgorithm = Simple\nseed = 12\n");
    const auto seed = resolved_seeds(cfg).front();
    const std::string first =
        trajectory_csv(run_trial(seed, config_arena(cfg), cfg.algorithm, cfg.setup), prov_for(cfg, seed));
    const LogHeader h = read_log_header(first);
    const RunConfig again = parse_config(h.config_text);
    const std::string second =
        trajectory_csv(run_trial(h.seed, config_arena(again), again.algorithm, again.setup), prov_for(again, h.seed));
    CHECK(first == second);
}

TEST_CASE("batch CSV round trip keeps the aggregates")
{
    const RunConfig cfg = parse_config("terrain = TallWall\nalgorithm = Simple\n");
    const auto seeds = seed_range(1, 12);
    const auto recs = run_batch(seeds, build_terrain(TerrainKind::TallWall), ControllerKind::Simple, cfg.setup, 1);
    const std::string csv = batch_csv(recs, prov_for(cfg, 1), {{"grid", "single"}});
    CHECK(read_log_header(csv).meta.at("grid") == "single");
    const auto back = read_batch_csv(csv);
    REQUIRE(back.size() == recs.size());
    const BatchStats a = aggregate(recs), b = aggregate(back);
    CHECK(a.successes == b.successes);
    CHECK(a.navigation_time.mean == b.navigation_time.mean);
    CHECK(a.backward_time.mean == b.backward_time.mean);
    CHECK(a.timeouts == b.timeouts);
    CHECK(a.immobile_stimulated == b.immobile_stimulated);
    CHECK(a.theta_orthogonal.n == b.theta_orthogonal.n);
    CHECK(a.accel_omega == b.accel_omega);
    CHECK(a.accel_linear == b.accel_linear);
}

TEST_CASE("detection CSV round trip")
{
    MissionRecord m;
    m.detections.push_back({0.0, {}, false, 3, std::nullopt, DetectionLabel::NoCandidate, {}});
    m.detections.push_back({1.0, {}, true, 40, 0.731, DetectionLabel::Human, {}});
    m.detections.push_back({2.0, {}, true, 22, -1.25, DetectionLabel::NonHuman, {}});
    const std::string csv = detection_csv(m, {config_to_text(parse_config("")), 1});
    CHECK(csv.find(std::string(kDetectionHeader) + "\n") != std::string::npos);
    const auto back = read_detection_csv(csv);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].t_s == m.detections[i].t_s);
        CHECK(back[i].gate_active == m.detections[i].gate_active);
        CHECK(back[i].hot_count == m.detections[i].hot_count);
        CHECK(back[i].score == m.detections[i].score);
        CHECK(back[i].label == m.detections[i].label);
    }
}

TEST_CASE("malformed CSV is rejected")
{
    const std::string head = "# biobot detections v1\n# config_hash = 00\n# seed = 1\n";
    CHECK_THROWS_AS(read_detection_csv(head + "t,gate\n"), FormatError);
    CHECK_THROWS_AS(read_detection_csv(head + std::string(kDetectionHeader) + "\n1,1,20,0.5\n"), FormatError);
    CHECK_THROWS_AS(read_detection_csv(head + std::string(kDetectionHeader) + "\n1,2,20,0.5,Human\n"), FormatError);
    CHECK_THROWS_AS(read_detection_csv(head), FormatError);
}

TEST_CASE("mission trajectory joins legs on one clock")
{
    const TrialSetup setup;
    Arena arena = build_terrain(TerrainKind::NoObstacle);
    MissionRecord m;
    Rng rng = make_rng(3);
    AgentState agent = spawn_agent({arena.origin().center, 90.0}, setup.behavior, rng);
    double t0 = 0.0;
    std::size_t rows = 0;
    for (const Disc& target : {arena.destination(), arena.origin()}) {
        auto rec = run_leg(agent, target, arena, ControllerKind::Predictive, setup, rng);
        rows += rec.rows.size();
        const double dur = rec.rows.back().t_ms / 1000.0;
        m.legs.push_back({target, false, t0, std::move(rec)});
        t0 += dur;
    }
    const std::string csv = mission_trajectory_csv(m, {config_to_text(parse_config("")), 3});
    CHECK(data_lines(csv) == rows - 1);
    const auto back = read_trajectory_rows(csv);
    for (std::size_t i = 1; i < back.size(); ++i)
        CHECK(back[i].t_ms > back[i - 1].t_ms);
}
