// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "biobot/comparison.hpp"
#include "biobot/config.hpp"
#include "biobot/detection.hpp"
#include "biobot/harness.hpp"
#include "biobot/mission.hpp"
#include "biobot/records.hpp"
#include "biobot/sensing.hpp"

#include "../support/fsm_traces.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace biobot;

namespace {

const std::string kData = BIOBOT_DATA_DIR;

int failures = 0;

void report(const char* id, const std::string& name, bool pass, const std::string& detail)
{
    std::printf("%-4s %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

void report_group(const char* id, const std::string& name, const std::vector<Criterion>& cs)
{
    bool ok = !cs.empty();
    std::string detail;
    for (const auto& c : cs) {
        ok = ok && c.pass;
        detail += (detail.empty() ? "" : "; ") + std::string(c.pass ? "" : "MISSED ") + c.name + " [" + c.detail + "]";
    }
    report(id, name, ok, detail);
}

void ac1()
{
    std::size_t passed = 0;
    std::string first_failure;
    const auto results = fsm_traces::all();
    for (const auto& r : results) {
        if (!r.failure)
            ++passed;
        else if (first_failure.empty())
            first_failure = r.name + ": " + *r.failure;
    }
    report("AC1", "FSM conformance", passed == results.size() && !results.empty(),
           std::to_string(passed) + "/" + std::to_string(results.size()) + " scripted traces" +
               (first_failure.empty() ? "" : ", first failure " + first_failure));
}

void ac2()
{
    Rng rng = make_rng(2024);
    double worst_d = 0.0, worst_g = 0.0;
    int n = 0;
    while (n < 100000) {
        const Vec2 c{uniform01(rng) * 600 - 100, uniform01(rng) * 700 - 100};
        const double h = uniform01(rng) * 720 - 360;
        const double body = 2.0 + uniform01(rng) * 6.0;
        const Vec2 dest{uniform01(rng) * 600 - 100, uniform01(rng) * 700 - 100};
        const MarkerTriple m = markers_from_pose({c, h}, body);
        const double hr = h * M_PI / 180.0;
        const double ax = c.x + 0.5 * body * std::cos(hr), ay = c.y + 0.5 * body * std::sin(hr);
        const double d_oracle = std::hypot(dest.x - ax, dest.y - ay);
        worst_d = std::max(worst_d, std::abs(distance_to_target(m.anterior, dest) - d_oracle));
        if (std::hypot(dest.x - c.x, dest.y - c.y) < 1e-6)
            continue;
        const double to_dest = std::atan2(dest.y - c.y, dest.x - c.x) * 180.0 / M_PI;
        double diff = std::fmod(to_dest - h, 360.0);
        if (diff < 0)
            diff += 360.0;
        const double g_oracle = diff > 180.0 ? 360.0 - diff : diff;
        worst_g = std::max(worst_g, std::abs(orientation_error(m, dest).gamma_deg - g_oracle));
        ++n;
    }
    const auto g = [](Vec2 dest) { return orientation_error(MarkerTriple{{1, 0}, {0, 0}, {-1, 0.5}}, dest).gamma_deg; };
    const bool exact = g({7, 0}) == 0.0 && g({0, 7}) == 90.0 && g({0, -7}) == 90.0 && g({-7, 0}) == 180.0;
    report("AC2", "geometry oracles", worst_d <= 1e-9 && worst_g <= 1e-9 && exact,
           fmt("1e5 configurations, max |D err| %.2e cm, max |gamma err| %.2e deg", worst_d, worst_g) +
               (exact ? ", 0/90/180 exact" : ", exact examples FAILED"));
}

void ac3()
{
    std::vector<double> field(kThermalPixels);
    Rng rng = make_rng(3);
    for (double& v : field)
        v = uniform01(rng);
    const std::size_t l2 = hog(field, 2).size(), l4 = hog(field, 4).size(), l8 = hog(field, 8).size();
    const bool ok = l2 == 8100 && l4 == 1764 && l8 == 324 && hog_length(2) == 8100 && hog_length(4) == 1764 &&
                    hog_length(8) == 324;
    report("AC3", "HOG lengths", ok, fmt("cell 2/4/8 -> %.0f/%.0f/%.0f", double(l2), double(l4), double(l8)));
}

void ac4()
{
    bool ok = true;
    for (int hot = 0; hot <= 40; ++hot) {
        ThermalImage img = uniform_image(22.0);
        for (int i = 0; i < hot; ++i)
            img.px[static_cast<std::size_t>(i * 7 % kThermalPixels)] = i % 2 ? 28.0 : 38.0;
        const GateResult g = hot_pixel_gate(img);
        ok = ok && g.count == hot && g.active == (hot > 15);
    }
    ThermalImage fifteen = uniform_image(22.0);
    for (int i = 0; i < 15; ++i)
        fifteen.px[static_cast<std::size_t>(i)] = 33.0;
    const bool boundary = !hot_pixel_gate(fifteen).active;
    Rng rng = make_rng(4);
    int random_ok = 0;
    for (int k = 0; k < 1000; ++k) {
        ThermalImage img;
        for (double& v : img.px)
            v = 20.0 + 25.0 * uniform01(rng) * uniform01(rng);
        const int count = static_cast<int>(std::count_if(img.px.begin(), img.px.end(),
                                                         [](double v) { return v >= 28.0 && v <= 38.0; }));
        const GateResult g = hot_pixel_gate(img);
        random_ok += g.count == count && g.active == (count > 15);
    }
    report("AC4", "gate semantics", ok && boundary && random_ok == 1000,
           std::string("counts 0..40 exact") + (ok ? "" : " FAILED") + ", 15 px " +
               (boundary ? "inactive" : "ACTIVE") + ", random frames " + std::to_string(random_ok) + "/1000");
}

void ac5_to_7()
{
    const auto seeds = seed_range(1, 100);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cells = run_comparison({TerrainKind::LowObstacle, TerrainKind::TallWall},
                                      {ControllerKind::Simple, ControllerKind::Predictive}, seeds, TrialSetup{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fputs(comparison_table(cells).c_str(), stdout);
    std::printf("     (100 paired seeds per cell, %.1f s)\n", secs);
    report_group("AC5", "terrain comparison", terrain_criteria(cells));
    report_group("AC6", "backward-motion reduction", backward_criteria(cells));
    report_group("AC7", "climb-mode statistics", climb_criteria(cells, 100));
}

void ac8()
{
    const auto train = synth_dataset(load_recipe(kData + "/recipes/train.recipe"), 1);
    const auto val = synth_dataset(load_recipe(kData + "/recipes/validation.recipe"), 2);
    const EvalMetrics e4 = evaluate(train_detector(train, 4, KernelKind::Linear), val);
    const EvalMetrics e2 = evaluate(train_detector(train, 2, KernelKind::Linear), val);
    const std::vector<Example> x{{{1, 1}, 1}, {{-1, -1}, 1}, {{1, -1}, -1}, {{-1, 1}, -1}};
    auto acc = [&](const SvmModel& m) {
        int ok = 0;
        for (const auto& e : x)
            ok += (classify(m, e.x).label == DetectionLabel::Human) == (e.y > 0);
        return ok / 4.0;
    };
    const double lin = acc(train_svm(x, KernelKind::Linear)), quad = acc(train_svm(x, KernelKind::Poly2));
    const bool ok = e4.accuracy >= 0.85 && e4.balanced_accuracy >= e2.balanced_accuracy && lin <= 0.75 && quad == 1.0;
    report("AC8", "synthetic detection", ok,
           fmt("cell 4 linear accuracy %.3f (n=%.0f); balanced cell 4 %.3f vs cell 2 %.3f", e4.accuracy, double(e4.n),
               e4.balanced_accuracy, e2.balanced_accuracy) +
               fmt("; XOR linear %.2f, quadratic %.2f", lin, quad));
}

void ac9()
{
    bool fix = true;
    for (double v : {-5.0, 0.0, 26.0, 37.5})
        fix = fix && median3x3(uniform_image(v)) == uniform_image(v);
    bool outlier = true;
    for (int r : {0, 5, 31})
        for (int c : {0, 17, 31}) {
            ThermalImage img = uniform_image(25.0);
            img.at(r, c) = 90.0;
            outlier = outlier && median3x3(img) == uniform_image(25.0);
        }
    Rng rng = make_rng(9);
    int equal = 0;
    for (int k = 0; k < 1000; ++k) {
        ThermalImage img;
        for (double& v : img.px)
            v = 15.0 + 30.0 * uniform01(rng);
        const ThermalImage m = median3x3(img);
        bool same = true;
        for (int r = 0; r < kThermalSize && same; ++r)
            for (int c = 0; c < kThermalSize && same; ++c) {
                double w[9];
                int n = 0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc)
                        w[n++] = img.at(std::clamp(r + dr, 0, kThermalSize - 1), std::clamp(c + dc, 0, kThermalSize - 1));
                std::sort(w, w + 9);
                same = m.at(r, c) == w[4];
            }
        equal += same;
    }
    report("AC9", "median filter", fix && outlier && equal == 1000,
           std::string("constant fixpoint ") + (fix ? "ok" : "FAILED") + ", single outlier " +
               (outlier ? "removed" : "NOT removed") + ", brute force " + std::to_string(equal) + "/1000");
}

void ac10()
{
    const PowerBudget b = power_budget(default_power_components(), Battery{120.0, 3.7});
    report("AC10", "power arithmetic", std::abs(b.total_mw - 205.5) < 1e-9 && std::abs(b.endurance_h - 2.16) <= 0.01,
           fmt("%.2f mW, 120 mAh at 3.7 V -> %.4f h", b.total_mw, b.endurance_h));
}

RunConfig mission_config()
{
    return parse_config("scenario = " + kData + "/mission_reference.scenario\nmodel = " + kData +
                        "/model_default.svm\nalgorithm = Predictive\nseed = 1\n");
}

void ac11()
{
    bool ok = true;
    std::string detail;
    // Trial: regenerate from the embedded config and seed.
    {
        RunConfig cfg = parse_config("terrain = TallWall\nalgorithm = Simple\nseed = 21\n");
        const auto s = resolved_seeds(cfg).front();
        const std::string a = trajectory_csv(run_trial(s, config_arena(cfg), cfg.algorithm, cfg.setup),
                                             {config_to_text(cfg), s});
        const LogHeader h = read_log_header(a);
        const RunConfig r = parse_config(h.config_text);
        const std::string b = trajectory_csv(run_trial(h.seed, config_arena(r), r.algorithm, r.setup),
                                             {config_to_text(r), h.seed});
        ok = ok && a == b && h.config_hash == hash_hex(fnv1a64(h.config_text));
        detail += std::string("trial ") + (a == b ? "identical" : "DIFFERS");
    }
    // Batch, rerun with a different worker count.
    {
        RunConfig cfg = parse_config("terrain = LowObstacle\nalgorithm = Predictive\nseeds = 1..20\n");
        const auto recs = run_batch(cfg.seeds, config_arena(cfg), cfg.algorithm, cfg.setup, 4);
        const std::string a = batch_csv(recs, {config_to_text(cfg), cfg.seeds.front()});
        const RunConfig r = parse_config(read_log_header(a).config_text);
        const std::string b =
            batch_csv(run_batch(r.seeds, config_arena(r), r.algorithm, r.setup, 1), {config_to_text(r), r.seeds.front()});
        ok = ok && a == b;
        detail += std::string(", batch ") + (a == b ? "identical" : "DIFFERS");
    }
    // Mission: trajectory and detection logs.
    {
        const RunConfig cfg = mission_config();
        auto once = [](const RunConfig& c) {
            MissionScenario sc = load_scenario(c.scenario_path);
            sc.seed = c.seeds.front();
            const MissionRecord rec = run_mission(sc, load_model(c.model_path), c.setup);
            const Provenance p{config_to_text(c), sc.seed};
            return mission_trajectory_csv(rec, p) + detection_csv(rec, p);
        };
        const std::string a = once(cfg);
        const std::string b = once(parse_config(read_log_header(a).config_text));
        ok = ok && a == b;
        detail += std::string(", mission ") + (a == b ? "identical" : "DIFFERS");
    }
    report("AC11", "determinism and replay", ok, detail);
}

void ac12()
{
    const RunConfig cfg = mission_config();
    MissionScenario sc = load_scenario(cfg.scenario_path);
    const MissionRecord rec = run_mission(sc, load_model(cfg.model_path), cfg.setup);
    const MissionReport r = mission_report(rec, sc, cfg.setup.nav);
    std::string humans;
    for (const auto& h : r.humans)
        humans += " " + h.name + (h.flagged ? "+" : "-");
    report("AC12", "mission demo", mission_passed(r),
           fmt("waypoints %.0f/%.0f, returned %s", double(r.waypoints_reached), double(r.waypoints)) +
               (r.returned ? "yes" : "no") + "; humans" + humans +
               fmt("; hot-object-only frames %.0f with %.0f Human labels; accelerations omega %.0f v_l %.0f",
                   double(r.hot_only_frames), double(r.hot_only_human_labels), double(r.accel_omega),
                   double(r.accel_linear)) +
               (r.provenance_violation ? "; " + *r.provenance_violation : "; all accelerations traced"));
}

} // namespace

int main()
{
    ac1();
    ac2();
    ac3();
    ac4();
    ac5_to_7();
    ac8();
    ac9();
    ac10();
    ac11();
    ac12();
    std::printf("%s: %d criterion line(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
