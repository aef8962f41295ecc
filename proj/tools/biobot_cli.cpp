// biobot: command-line front end for trials, batches, detector training and the mission demo.

#include "biobot/comparison.hpp"
#include "biobot/config.hpp"
#include "biobot/detection.hpp"
#include "biobot/harness.hpp"
#include "biobot/kvfile.hpp"
#include "biobot/mission.hpp"
#include "biobot/plot.hpp"
#include "biobot/records.hpp"
#include "biobot/thermal.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using namespace biobot;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRuntime = 2, kMiss = 3 };

struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed;
    std::string out;
    unsigned threads{0};
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config_path, "flat key = value config file");
    cmd->add_option("--set", c.sets, "override one config key, key=value (repeatable)");
    cmd->add_option("--seed", c.seed, "seed or seed list (7, 1,2,3, 1..50)");
    cmd->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config_path.empty() ? parse_config("") : load_config(c.config_path);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw FormatError("--set '" + s + "': expected key=value");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const bool known = std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end() ||
                           key.rfind("behavior.", 0) == 0;
        if (!known)
            throw FormatError("--set: unknown key '" + key + "'");
        apply_config_value(cfg, key, std::string_view(s).substr(eq + 1), "--set");
    }
    if (!c.seed.empty())
        cfg.seeds = parse_seed_list(c.seed, "--seed");
    if (!c.out.empty())
        cfg.output_dir = c.out;
    try {
        validate(cfg.setup.nav);
        validate(cfg.setup.behavior);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return cfg;
}

std::string write_file(const RunConfig& cfg, const std::string& name, const std::string& body)
{
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << body))
        throw RuntimeFailure("cannot write '" + path + "'");
    return path;
}

std::vector<TerrainKind> all_terrains()
{
    return {TerrainKind::NoObstacle, TerrainKind::LowObstacle, TerrainKind::TallWall};
}

bool print_criteria(const std::vector<Criterion>& cs)
{
    bool ok = true;
    for (const auto& c : cs) {
        std::printf("%s  %-46s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.pass;
    }
    return ok;
}

// ---- trial ----------------------------------------------------------------

struct TrialOutput {
    TrialRecord record;
    std::string csv;
};

TrialOutput trial_output(RunConfig cfg, std::uint64_t seed)
{
    cfg.seeds = {seed};
    const Arena arena = config_arena(cfg);
    TrialRecord rec = run_trial(seed, arena, cfg.algorithm, cfg.setup);
    const std::string csv = trajectory_csv(rec, {config_to_text(cfg), seed});
    return {std::move(rec), csv};
}

int cmd_trial(const Common& c, bool svg)
{
    RunConfig cfg = resolve(c);
    const auto seeds = resolved_seeds(cfg);
    const std::uint64_t seed = seeds.front();
    if (seeds.size() > 1)
        std::fprintf(stderr, "trial: using the first of %zu seeds\n", seeds.size());
    const auto out = trial_output(cfg, seed);
    const auto& r = out.record;
    const std::string path = write_file(cfg, "trajectory.csv", out.csv);
    if (svg) {
        char title[128];
        std::snprintf(title, sizeof title, "%s / %s / seed %llu", std::string(to_string(r.terrain)).c_str(),
                      std::string(to_string(r.controller)).c_str(), static_cast<unsigned long long>(seed));
        write_file(cfg, "trajectory.svg", svg_trajectory(r.rows, config_arena(cfg), cfg.setup.nav, title));
    }
    std::printf("seed %llu  %s after %.2f s  backward %.2f s  climb %s", static_cast<unsigned long long>(seed),
                std::string(to_string(r.status.outcome)).c_str(), r.status.elapsed_s, r.metrics.backward_time_s,
                std::string(to_string(r.metrics.climb_mode)).c_str());
    if (r.metrics.first_climb_theta_deg)
        std::printf(" (theta %.1f)", *r.metrics.first_climb_theta_deg);
    std::printf("  accelerations %zu\n  wrote %s\n", r.metrics.accel_events.size(), path.c_str());
    return kOk;
}

// ---- batch ----------------------------------------------------------------

struct BatchOutput {
    std::vector<ComparisonCell> cells;
    std::string csv;
};

BatchOutput batch_output(const RunConfig& cfg, bool compare, unsigned threads)
{
    const auto seeds = resolved_seeds(cfg);
    BatchOutput out;
    if (compare) {
        out.cells = run_comparison(all_terrains(), {ControllerKind::Simple, ControllerKind::Predictive}, seeds,
                                   cfg.setup, threads);
    } else {
        const Arena arena = config_arena(cfg);
        ComparisonCell cell{arena.kind(), cfg.algorithm, run_batch(seeds, arena, cfg.algorithm, cfg.setup, threads), {}};
        cell.stats = aggregate(cell.records);
        out.cells.push_back(std::move(cell));
    }
    std::vector<TrialRecord> all;
    for (const auto& cell : out.cells)
        all.insert(all.end(), cell.records.begin(), cell.records.end());
    out.csv = batch_csv(all, {config_to_text(cfg), seeds.front()}, {{"grid", compare ? "compare" : "single"}});
    return out;
}

int cmd_batch(const Common& c, std::size_t trials, bool compare, bool check)
{
    RunConfig cfg = resolve(c);
    if (trials > 0) {
        const std::uint64_t first = cfg.seeds.empty() ? 1 : cfg.seeds.front();
        cfg.seeds = seed_range(first, trials);
    }
    if (cfg.seeds.empty())
        throw FormatError("batch: needs seeds (--seed 1..50, --trials N or seeds = ...)");
    compare = compare || check;
    const auto out = batch_output(cfg, compare, c.threads);
    const std::string path = write_file(cfg, "batch.csv", out.csv);
    std::string summary;
    for (const auto& cell : out.cells)
        summary += batch_summary(cell.stats, std::string(to_string(cell.terrain)) + " / " +
                                                 std::string(to_string(cell.controller)));
    if (compare)
        summary += "\n" + comparison_table(out.cells);
    write_file(cfg, "summary.txt", summary);
    std::fputs(summary.c_str(), stdout);
    std::vector<BatchBar> bars;
    for (const auto& cell : out.cells)
        bars.push_back({std::string(to_string(cell.terrain)), std::string(to_string(cell.controller)),
                        cell.stats.success_rate, cell.stats.navigation_time});
    write_file(cfg, "batch.svg", svg_batch_bars(bars, "success rate and navigation time"));
    std::printf("wrote %s\n", path.c_str());
    if (!check)
        return kOk;
    std::vector<Criterion> cs = terrain_criteria(out.cells);
    for (auto&& v : {backward_criteria(out.cells), climb_criteria(out.cells)})
        cs.insert(cs.end(), v.begin(), v.end());
    return print_criteria(cs) ? kOk : kMiss;
}

// ---- calibrate ------------------------------------------------------------

int cmd_calibrate(const Common& c, const std::vector<std::string>& params, int samples, int rounds, int trials)
{
    RunConfig cfg = resolve(c);
    const auto targets = default_calibration_targets();
    const std::uint64_t seed = resolved_seeds(cfg).front();
    if (params.empty()) {
        std::vector<CalibStat> stats;
        for (const auto& t : targets)
            stats.push_back(t.stat);
        const auto got = evaluate_stats(stats, cfg.setup, trials, seed);
        bool ok = true;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const bool within = std::abs(got[i] - targets[i].value) <= targets[i].tolerance;
            ok = ok && (within || !targets[i].mandatory);
            std::printf("%-24s target %8.3f +- %-7.3f got %8.3f %s%s\n",
                        std::string(to_string(targets[i].stat)).c_str(), targets[i].value, targets[i].tolerance,
                        got[i], within ? "ok" : "off", targets[i].mandatory ? "" : " (advisory)");
        }
        return ok ? kOk : kMiss;
    }
    CalibSearch search;
    search.random_samples = samples;
    search.descent_rounds = rounds;
    search.trials_per_eval = trials;
    search.seed = seed;
    for (const auto& p : params) {
        std::istringstream in(p);
        std::string name, lo, hi;
        if (!std::getline(in, name, ':') || !std::getline(in, lo, ':') || !std::getline(in, hi))
            throw FormatError("--param '" + p + "': expected name:lo:hi");
        if (!behavior_param(cfg.setup.behavior, name))
            throw FormatError("--param: unknown behavior parameter '" + name + "'");
        search.params.push_back(name);
        search.bounds.emplace_back(parse_double(lo, name), parse_double(hi, name));
    }
    const CalibResult res = calibrate(targets, search, cfg.setup);
    for (const auto& [t, v] : res.achieved)
        std::printf("%-24s target %8.3f got %8.3f\n", std::string(to_string(t.stat)).c_str(), t.value, v);
    std::printf("misfit %.4f after %d evaluations, mandatory targets %s\n", res.misfit, res.evaluations,
                res.mandatory_met ? "met" : "missed");
    const std::string path =
        write_file(cfg, "behavior_calibrated.params", behavior_params_to_text(res.params, "calibrated behavior"));
    std::printf("wrote %s\n", path.c_str());
    return res.mandatory_met ? kOk : kMiss;
}

// ---- detector -------------------------------------------------------------

std::vector<std::string> recipe_paths(const RunConfig& cfg, const std::vector<std::string>& flags)
{
    if (!flags.empty())
        return flags;
    if (cfg.recipe_path.empty())
        throw FormatError("no recipe: pass --recipe or set recipe = ...");
    return {cfg.recipe_path};
}

int cmd_synth(const Common& c, const std::vector<std::string>& recipes)
{
    RunConfig cfg = resolve(c);
    const std::uint64_t seed = resolved_seeds(cfg).front();
    const auto paths = recipe_paths(cfg, recipes);
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const DatasetRecipe r = load_recipe(paths[k]);
        const auto data = synth_dataset(r, seed + k);
        const std::string manifest = write_dataset(data, (fs::path(cfg.output_dir) / r.name).string());
        std::printf("%s: %zu images (seed %llu) -> %s\n", r.name.c_str(), data.size(),
                    static_cast<unsigned long long>(seed + k), manifest.c_str());
    }
    return kOk;
}

int cmd_train(const Common& c, const std::vector<std::string>& recipes, std::string model_out)
{
    RunConfig cfg = resolve(c);
    const std::uint64_t seed = resolved_seeds(cfg).front();
    std::vector<LabeledImage> data;
    const auto paths = recipe_paths(cfg, recipes);
    for (std::size_t k = 0; k < paths.size(); ++k) {
        auto d = synth_dataset(load_recipe(paths[k]), seed + k);
        data.insert(data.end(), d.begin(), d.end());
    }
    TrainOptions opts;
    opts.C = cfg.svm_c;
    opts.epochs = cfg.svm_epochs;
    opts.seed = seed;
    const SvmModel m = train_detector(data, cfg.cell_size, cfg.kernel, opts);
    if (model_out.empty())
        model_out = (fs::path(cfg.output_dir) / "model.svm").string();
    if (const auto dir = fs::path(model_out).parent_path(); !dir.empty())
        fs::create_directories(dir);
    save_model(m, model_out);
    std::printf("trained %s cell %d on %zu images, objective %.4f\nwrote %s\n", std::string(to_string(m.kernel)).c_str(),
                m.cell_size, data.size(), m.objective, model_out.c_str());
    return kOk;
}

std::string model_path(const RunConfig& cfg, const std::string& flag)
{
    if (!flag.empty())
        return flag;
    if (cfg.model_path.empty())
        throw FormatError("no model: pass --model or set model = ...");
    return cfg.model_path;
}

int cmd_eval(const Common& c, const std::vector<std::string>& recipes, const std::string& model_flag, bool check)
{
    RunConfig cfg = resolve(c);
    const std::uint64_t seed = resolved_seeds(cfg).front();
    const SvmModel m = load_model(model_path(cfg, model_flag));
    std::vector<LabeledImage> data;
    const auto paths = recipe_paths(cfg, recipes);
    for (std::size_t k = 0; k < paths.size(); ++k) {
        auto d = synth_dataset(load_recipe(paths[k]), seed + k);
        data.insert(data.end(), d.begin(), d.end());
    }
    const EvalMetrics e = evaluate(m, data);
    std::printf("images %zu  accuracy %.4f  balanced %.4f  human %.4f  non-human %.4f\n", e.n, e.accuracy,
                e.balanced_accuracy, e.positive_accuracy, e.negative_accuracy);
    std::printf("tp %zu fn %zu tn %zu fp %zu  gated out %zu\n", e.tp, e.fn, e.tn, e.fp, e.gated_out);
    for (const auto& b : e.recall_by_distance)
        std::printf("  %.2f m  recall %.3f (%zu/%zu)\n", b.distance_m, b.recall(), b.detected, b.positives);
    if (!check)
        return kOk;
    return print_criteria({{"validation accuracy >= 85%", std::to_string(e.accuracy), e.accuracy >= 0.85}}) ? kOk
                                                                                                             : kMiss;
}

int cmd_detect(const Common& c, const std::vector<std::string>& images, const std::string& model_flag)
{
    RunConfig cfg = resolve(c);
    const SvmModel m = load_model(model_path(cfg, model_flag));
    for (const auto& p : images) {
        const auto img = image_from_text(read_text_file(p), p);
        std::uint64_t madds = 0;
        const auto r = detect(img, m, &madds);
        std::printf("%s  gate %s (%d px)  ", p.c_str(), r.gate_active ? "on" : "off", r.hot_pixel_count);
        if (r.score)
            std::printf("score %+.4f  ", *r.score);
        std::printf("%s  %llu multiply-adds\n", std::string(to_string(r.label)).c_str(),
                    static_cast<unsigned long long>(madds));
    }
    return kOk;
}

// ---- mission --------------------------------------------------------------

struct MissionOutput {
    MissionScenario scenario;
    MissionRecord record;
    std::string trajectory;
    std::string detections;
};

MissionOutput mission_output(RunConfig& cfg)
{
    if (cfg.scenario_path.empty())
        throw FormatError("mission: pass --scenario or set scenario = ...");
    MissionOutput out;
    out.scenario = load_scenario(cfg.scenario_path);
    if (cfg.seeds.empty())
        cfg.seeds = {out.scenario.seed};
    out.scenario.seed = cfg.seeds.front();
    const SvmModel m = load_model(model_path(cfg, ""));
    out.record = run_mission(out.scenario, m, cfg.setup);
    const Provenance prov{config_to_text(cfg), out.scenario.seed};
    out.trajectory = mission_trajectory_csv(out.record, prov);
    out.detections = detection_csv(out.record, prov);
    return out;
}

int cmd_mission(const Common& c, const std::string& scenario, const std::string& model, bool check)
{
    RunConfig cfg = resolve(c);
    cfg.algorithm = ControllerKind::Predictive;
    if (!scenario.empty())
        cfg.scenario_path = scenario;
    if (!model.empty())
        cfg.model_path = model;
    const auto out = mission_output(cfg);
    write_file(cfg, "mission_trajectory.csv", out.trajectory);
    write_file(cfg, "detections.csv", out.detections);
    write_file(cfg, "scenario.scenario", scenario_to_text(out.scenario));
    write_file(cfg, "mission.svg", svg_trajectory(out.record, out.scenario.arena, cfg.setup.nav, out.scenario.name));
    if (!out.record.detections.empty())
        write_file(cfg, "detections.svg", svg_detection_timeline(out.record.detections, "detections"));

    const MissionReport r = mission_report(out.record, out.scenario, cfg.setup.nav);
    std::printf("mission %s seed %llu: %.1f s, waypoints %zu/%zu, returned %s\n", out.scenario.name.c_str(),
                static_cast<unsigned long long>(out.scenario.seed), out.record.duration_s, r.waypoints_reached,
                r.waypoints, r.returned ? "yes" : "no");
    std::printf("frames %zu, gate on %zu, human labels %zu, hot-object-only frames %zu (human labels %zu)\n", r.frames,
                r.gate_activations, r.human_labels, r.hot_only_frames, r.hot_only_human_labels);
    for (const auto& h : r.humans)
        std::printf("  %-12s %s  flagged frames %zu  closest %s\n", h.name.c_str(), h.flagged ? "found" : "missed",
                    h.flagged_frames, h.closest_m ? (format_double(*h.closest_m) + " m").c_str() : "-");
    std::printf("accelerations: omega %zu, v_l %zu%s\nwrote %s\n", r.accel_omega, r.accel_linear,
                r.provenance_violation ? ("; " + *r.provenance_violation).c_str() : "", cfg.output_dir.c_str());
    if (!check)
        return kOk;
    return mission_passed(r) ? kOk : kMiss;
}

// ---- plot / replay --------------------------------------------------------

RunConfig embedded_config(const LogHeader& h, const std::string& source)
{
    return parse_config(h.config_text, source + " (embedded config)");
}

int cmd_plot(const std::string& file, std::string out)
{
    const std::string text = read_text_file(file);
    const LogHeader h = read_log_header(text, file);
    std::string svg;
    if (h.format == "trajectory v1" || h.format == "mission-trajectory v1") {
        const RunConfig cfg = embedded_config(h, file);
        const Arena arena = h.format == "trajectory v1" ? config_arena(cfg) : load_scenario(cfg.scenario_path).arena;
        svg = svg_trajectory(read_trajectory_rows(text, file), arena, cfg.setup.nav, fs::path(file).filename().string());
    } else if (h.format == "detections v1") {
        svg = svg_detection_timeline(read_detection_csv(text, file), fs::path(file).filename().string());
    } else if (h.format == "batch v1") {
        std::map<std::pair<std::string, std::string>, std::vector<TrialRecord>> groups;
        std::vector<std::pair<std::string, std::string>> order;
        for (auto& r : read_batch_csv(text, file)) {
            std::pair<std::string, std::string> k{std::string(to_string(r.terrain)),
                                                  std::string(to_string(r.controller))};
            if (!groups.count(k))
                order.push_back(k);
            groups[k].push_back(std::move(r));
        }
        std::vector<BatchBar> bars;
        for (const auto& k : order) {
            const auto s = aggregate(groups[k]);
            bars.push_back({k.first, k.second, s.success_rate, s.navigation_time});
        }
        svg = svg_batch_bars(bars, fs::path(file).filename().string());
    } else {
        throw FormatError(file + ": cannot plot format '" + h.format + "'");
    }
    if (out.empty())
        out = fs::path(file).replace_extension(".svg").string();
    std::ofstream f(out, std::ios::binary);
    if (!f || !(f << svg))
        throw RuntimeFailure("cannot write '" + out + "'");
    std::printf("wrote %s\n", out.c_str());
    return kOk;
}

int cmd_replay(const std::string& file, unsigned threads)
{
    const std::string text = read_text_file(file);
    const LogHeader h = read_log_header(text, file);
    RunConfig cfg = embedded_config(h, file);
    if (hash_hex(fnv1a64(h.config_text)) != h.config_hash)
        throw RuntimeFailure(file + ": embedded config does not match its hash " + h.config_hash);
    std::string regenerated;
    if (h.format == "trajectory v1") {
        regenerated = trial_output(cfg, h.seed).csv;
    } else if (h.format == "batch v1") {
        const auto it = h.meta.find("grid");
        regenerated = batch_output(cfg, it != h.meta.end() && it->second == "compare", threads).csv;
    } else if (h.format == "mission-trajectory v1" || h.format == "detections v1") {
        const auto out = mission_output(cfg);
        regenerated = h.format == "detections v1" ? out.detections : out.trajectory;
    } else {
        throw FormatError(file + ": cannot replay format '" + h.format + "'");
    }
    if (regenerated == text) {
        std::printf("%s: identical (%zu bytes, config %s, seed %llu)\n", file.c_str(), text.size(),
                    h.config_hash.c_str(), static_cast<unsigned long long>(h.seed));
        return kOk;
    }
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(text.size(), regenerated.size()) && text[i] == regenerated[i]; ++i)
        line += text[i] == '\n';
    throw RuntimeFailure(file + ": replay differs from line " + std::to_string(line));
}

// ---- terrain / power ------------------------------------------------------

int cmd_terrain(const Common& c, const std::vector<std::string>& names, bool to_stdout)
{
    RunConfig cfg = resolve(c);
    std::vector<TerrainKind> kinds;
    if (names.empty() || (names.size() == 1 && names[0] == "all"))
        kinds = all_terrains();
    else
        for (const auto& n : names)
            kinds.push_back(terrain_from_string(n));
    for (auto k : kinds) {
        const std::string text = arena_to_text(build_terrain(k));
        if (to_stdout)
            std::fputs(text.c_str(), stdout);
        else
            std::printf("wrote %s\n",
                        write_file(cfg, std::string(to_string(k)) + ".arena", text).c_str());
    }
    return kOk;
}

int cmd_power(double capacity, double voltage, bool check)
{
    const PowerBudget b = power_budget(default_power_components(), {capacity, voltage});
    for (const auto& comp : b.components)
        std::printf("%-22s %8.2f mW x %.3f duty  -> %8.2f mW\n", comp.name.c_str(), comp.active_mw, comp.duty,
                    comp.average_mw());
    std::printf("total %.2f mW, battery %.0f mAh at %.2f V, endurance %.3f h\n", b.total_mw, b.battery.capacity_mah,
                b.battery.voltage_v, b.endurance_h);
    if (!check)
        return kOk;
    return print_criteria({{"total 205.5 mW", format_double(b.total_mw), std::abs(b.total_mw - 205.5) < 1e-9},
                           {"endurance 2.16 h +- 0.01", format_double(b.endurance_h),
                            std::abs(b.endurance_h - 2.16) <= 0.01}})
               ? kOk
               : kMiss;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"biobot: insect-hybrid navigation and thermal human detection simulator"};
    app.require_subcommand(1);
    Common common;
    int code = kOk;
    std::function<int()> run;

    auto* terrain = app.add_subcommand("terrain", "write preset arenas");
    std::vector<std::string> terrain_names;
    bool terrain_stdout = false;
    add_common(terrain, common);
    terrain->add_option("names", terrain_names, "NoObstacle LowObstacle TallWall or all");
    terrain->add_flag("--stdout", terrain_stdout, "print instead of writing files");
    terrain->callback([&] { run = [&] { return cmd_terrain(common, terrain_names, terrain_stdout); }; });

    auto* trial = app.add_subcommand("trial", "run one trial and log its trajectory");
    bool no_svg = false;
    add_common(trial, common);
    trial->add_flag("--no-svg", no_svg, "skip the trajectory plot");
    trial->callback([&] { run = [&] { return cmd_trial(common, !no_svg); }; });

    auto* batch = app.add_subcommand("batch", "run many seeds; --compare for the terrain x algorithm grid");
    std::size_t trials = 0;
    bool compare = false, batch_check = false;
    add_common(batch, common);
    batch->add_option("--trials", trials, "seeds first..first+N-1, first from --seed (default 1)");
    batch->add_flag("--compare", compare, "all terrains x both algorithms on paired seeds");
    batch->add_flag("--check", batch_check, "evaluate acceptance bands; exit 3 on a miss (implies --compare)");
    batch->add_option("--threads", common.threads, "worker threads (0 = hardware)");
    batch->callback([&] { run = [&] { return cmd_batch(common, trials, compare, batch_check); }; });

    auto* calib = app.add_subcommand("calibrate", "check or fit behavior parameters against the target statistics");
    std::vector<std::string> calib_params;
    int samples = 8, rounds = 2, calib_trials = 50;
    add_common(calib, common);
    calib->add_option("--param", calib_params, "name:lo:hi to vary (repeatable); none = report only");
    calib->add_option("--samples", samples, "random samples");
    calib->add_option("--rounds", rounds, "coordinate descent rounds");
    calib->add_option("--trials", calib_trials, "paired seeds per evaluation");
    calib->callback([&] { run = [&] { return cmd_calibrate(common, calib_params, samples, rounds, calib_trials); }; });

    std::vector<std::string> recipes;
    std::string model, model_out, scenario;

    auto* synth = app.add_subcommand("synth-data", "render labeled thermal datasets; recipe k uses seed+k");
    add_common(synth, common);
    synth->add_option("--recipe", recipes, "dataset recipe (repeatable)");
    synth->callback([&] { run = [&] { return cmd_synth(common, recipes); }; });

    auto* train = app.add_subcommand("train", "train a detector on synthesized recipes; recipe k uses seed+k");
    add_common(train, common);
    train->add_option("--recipe", recipes, "dataset recipe (repeatable)");
    train->add_option("--model-out", model_out, "model file (default <out>/model.svm)");
    train->callback([&] { run = [&] { return cmd_train(common, recipes, model_out); }; });

    auto* eval = app.add_subcommand("eval", "evaluate a model on synthesized recipes");
    bool eval_check = false;
    add_common(eval, common);
    eval->add_option("--recipe", recipes, "dataset recipe (repeatable)");
    eval->add_option("--model", model, "model file");
    eval->add_flag("--check", eval_check, "exit 3 below 85% accuracy");
    eval->callback([&] { run = [&] { return cmd_eval(common, recipes, model, eval_check); }; });

    auto* det = app.add_subcommand("detect", "run the detector on image files");
    std::vector<std::string> images;
    add_common(det, common);
    det->add_option("images", images, "32x32 image text files")->required();
    det->add_option("--model", model, "model file");
    det->callback([&] { run = [&] { return cmd_detect(common, images, model); }; });

    auto* mission = app.add_subcommand("mission", "run the search mission with onboard detection");
    bool mission_check = false;
    add_common(mission, common);
    mission->add_option("--scenario", scenario, "mission scenario file");
    mission->add_option("--model", model, "model file");
    mission->add_flag("--check", mission_check, "exit 3 unless the demonstration passes");
    mission->callback([&] { run = [&] { return cmd_mission(common, scenario, model, mission_check); }; });

    auto* plot = app.add_subcommand("plot", "SVG from a trajectory, batch or detection CSV");
    std::string plot_file, plot_out;
    plot->add_option("file", plot_file, "CSV written by trial, batch or mission")->required();
    plot->add_option("-o,--output", plot_out, "SVG path (default: next to the CSV)");
    plot->callback([&] { run = [&] { return cmd_plot(plot_file, plot_out); }; });

    auto* power = app.add_subcommand("power", "backpack power budget and endurance");
    double capacity = 120.0, voltage = 3.7;
    bool power_check = false;
    power->add_option("--capacity", capacity, "battery mAh");
    power->add_option("--voltage", voltage, "battery V");
    power->add_flag("--check", power_check, "exit 3 unless 205.5 mW and 2.16 h");
    power->callback([&] { run = [&] { return cmd_power(capacity, voltage, power_check); }; });

    auto* replay = app.add_subcommand("replay", "rerun a logged CSV from its embedded config and compare bytes");
    std::string replay_file;
    replay->add_option("file", replay_file, "CSV written by trial, batch or mission")->required();
    replay->add_option("--threads", common.threads, "worker threads for batch replays");
    replay->callback([&] { run = [&] { return cmd_replay(replay_file, common.threads); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    try {
        code = run();
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return kRuntime;
    }
    return code;
}
