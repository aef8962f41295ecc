#include "doctest.h"

#include "biobot/plot.hpp"

#include <string>

using namespace biobot;

namespace {

std::size_t count(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1))
        ++n;
    return n;
}

TrialRow row(int t, double x, Stimulus cmd, Phase phase)
{
    TrialRow r;
    r.t_ms = t;
    r.pose = {{x, 50.0}, 0.0};
    r.cmd = cmd;
    r.phase = phase;
    return r;
}

} // namespace

TEST_CASE("trajectory plot has one path per colour run")
{
    std::vector<TrialRow> rows{
        row(0, 10, Stimulus::None, Phase::Monitoring),         row(30, 11, Stimulus::None, Phase::Monitoring),
        row(60, 12, Stimulus::LeftCercus, Phase::Steering),    row(90, 13, Stimulus::LeftCercus, Phase::Steering),
        row(120, 14, Stimulus::None, Phase::PostSteerGrace),   row(150, 15, Stimulus::RightCercus, Phase::Steering),
        row(180, 16, Stimulus::Accelerate, Phase::Accelerating), row(210, 17, Stimulus::None, Phase::Monitoring),
    };
    rows[1].omega_sampled = 2.0;  // below 5 deg/s
    rows[3].omega_sampled = 9.0;  // above
    rows[7].vl_sampled = 1.0;     // below 2 cm/s
    const Arena arena = build_terrain(TerrainKind::NoObstacle);
    const std::string svg = svg_trajectory(rows, arena, NavParams{}, "t");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "<path class=\"segment ") == 6);
    CHECK(count(svg, "class=\"segment free\"") == 3);
    CHECK(count(svg, "class=\"segment steer-left\"") == 1);
    CHECK(count(svg, "class=\"segment steer-right\"") == 1);
    CHECK(count(svg, "class=\"segment accel\"") == 1);
    CHECK(count(svg, "class=\"marker omega\"") == 1);
    CHECK(count(svg, "class=\"marker v_l\"") == 1);
    CHECK_THROWS_AS(svg_trajectory(std::vector<TrialRow>{}, arena, NavParams{}), std::invalid_argument);
}

TEST_CASE("single trial plot: segment count matches phase runs")
{
    const Arena arena = build_terrain(TerrainKind::TallWall);
    const auto rec = run_trial(2, arena, ControllerKind::Predictive, TrialSetup{});
    std::size_t runs = 1;
    for (std::size_t i = 1; i < rec.rows.size(); ++i)
        runs += phase_class(rec.rows[i]) != phase_class(rec.rows[i - 1]);
    CHECK(count(svg_trajectory(rec.rows, arena, NavParams{}), "<path class=\"segment ") == runs);
}

TEST_CASE("batch bars: two algorithms by three terrains")
{
    std::vector<BatchBar> bars;
    for (const char* t : {"NoObstacle", "LowObstacle", "TallWall"})
        for (const char* a : {"Simple", "Predictive"})
            bars.push_back({t, a, 0.5, MeanSd{10, 30.0, 4.0}});
    const std::string svg = svg_batch_bars(bars, "grid");
    CHECK(count(svg, "class=\"bar success\"") == 6);
    CHECK(count(svg, "class=\"bar navtime\"") == 6);
    CHECK(count(svg, "class=\"whisker\"") == 6);
    CHECK_THROWS_AS(svg_batch_bars({}), std::invalid_argument);
}

TEST_CASE("detection timeline: gate curve and score dots")
{
    std::vector<DetectionLogEntry> frames;
    for (int i = 0; i < 10; ++i) {
        DetectionLogEntry e;
        e.t_s = i;
        e.hot_count = 5 * i;
        e.gate_active = e.hot_count > 15;
        if (e.gate_active) {
            e.score = i % 2 ? 0.5 : -0.5;
            e.label = i % 2 ? DetectionLabel::Human : DetectionLabel::NonHuman;
        }
        frames.push_back(e);
    }
    const std::string svg = svg_detection_timeline(frames, "m");
    CHECK(count(svg, "class=\"gate-count\"") == 1);
    CHECK(count(svg, "class=\"gate-threshold\"") == 1);
    CHECK(count(svg, "class=\"score human\"") == 3);
    CHECK(count(svg, "class=\"score nonhuman\"") == 3);
    CHECK_THROWS_AS(svg_detection_timeline({}), std::invalid_argument);
}
