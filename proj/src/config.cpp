#include "biobot/config.hpp"

#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace biobot {

namespace {

constexpr std::string_view kBehaviorPrefix = "behavior.";
constexpr std::string_view kCurveKey = "climb_prob_vs_theta";

struct NavKey {
    std::string_view key;
    double NavParams::*field;
};

const std::vector<NavKey>& nav_keys()
{
    static const std::vector<NavKey> keys{
        {"gamma_t", &NavParams::gamma_t_deg},
        {"omega_t", &NavParams::omega_t_dps},
        {"v_t", &NavParams::v_t_cmps},
        {"t_v", &NavParams::t_v_ms},
        {"t_f1", &NavParams::t_f1_ms},
        {"t_f2", &NavParams::t_f2_ms},
        {"t_f3", &NavParams::t_f3_ms},
        {"d_a", &NavParams::d_a_ms},
        {"d_s", &NavParams::d_s_ms},
        {"tick", &NavParams::tick_ms},
        {"trial_limit", &NavParams::trial_limit_s},
        {"motionless_window", &NavParams::motionless_window_s},
        {"motionless_disp", &NavParams::motionless_disp_cm},
    };
    return keys;
}

FormatError bad(std::string_view source, std::string_view key, const std::string& why)
{
    return FormatError(std::string(source) + ": key '" + std::string(key) + "': " + why);
}

long long int_value(std::string_view source, std::string_view key, std::string_view value)
{
    try {
        return parse_int(trim(value), key);
    } catch (const FormatError& e) {
        throw bad(source, key, "expected an integer, got '" + trim(value) + "'");
    }
}

double double_value(std::string_view source, std::string_view key, std::string_view value)
{
    try {
        return parse_double(trim(value), key);
    } catch (const FormatError& e) {
        throw bad(source, key, "expected a number, got '" + trim(value) + "'");
    }
}

void apply_nav_file(RunConfig& cfg, const std::string& path)
{
    const KvDocument doc = load_kv(path);
    for (const auto& sec : doc.sections) {
        if (!sec.name.empty())
            throw FormatError(path + ":" + std::to_string(sec.line) + ": unexpected section [" + sec.name + "]");
        for (const auto& e : sec.entries) {
            const auto it = std::find_if(nav_keys().begin(), nav_keys().end(),
                                         [&](const NavKey& k) { return k.key == e.key; });
            if (it == nav_keys().end())
                throw FormatError(path + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
            cfg.setup.nav.*(it->field) = double_value(path, e.key, e.value);
        }
    }
}

} // namespace

const std::vector<std::string_view>& config_keys()
{
    static const std::vector<std::string_view> keys = [] {
        std::vector<std::string_view> k{"terrain",     "arena",     "algorithm",  "seed",       "seeds",
                                        "recipe",      "model",     "scenario",   "output_dir", "cell_size",
                                        "kernel",      "svm_c",     "svm_epochs", "nav_params", "behavior_params",
                                        "physics_substeps", "start_heading_spread"};
        for (const auto& n : nav_keys())
            k.push_back(n.key);
        return k;
    }();
    return keys;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text, std::string_view key)
{
    const std::string t = trim(text);
    std::vector<std::uint64_t> out;
    auto seed = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw FormatError("key '" + std::string(key) + "': expected non-negative integers, got '" + s + "'");
        return static_cast<std::uint64_t>(std::stoull(s));
    };
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const std::uint64_t a = seed(trim(t.substr(0, dots))), b = seed(trim(t.substr(dots + 2)));
        if (b < a)
            throw FormatError("key '" + std::string(key) + "': empty range '" + t + "'");
        for (std::uint64_t s = a; s <= b; ++s)
            out.push_back(s);
        return out;
    }
    std::string norm = t;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream in(norm);
    std::string w;
    while (in >> w)
        out.push_back(seed(w));
    if (out.empty())
        throw FormatError("key '" + std::string(key) + "': no seeds given");
    return out;
}

void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value, std::string_view source)
{
    const std::string v = trim(value);
    try {
        if (key.substr(0, kBehaviorPrefix.size()) == kBehaviorPrefix) {
            const std::string_view name = key.substr(kBehaviorPrefix.size());
            if (name == kCurveKey) {
                cfg.setup.behavior.climb_prob_vs_theta = PiecewiseCurve::from_text(v, name);
                return;
            }
            double* slot = behavior_param(cfg.setup.behavior, name);
            if (!slot)
                throw bad(source, key, "unknown key");
            *slot = double_value(source, key, v);
            return;
        }
        for (const auto& n : nav_keys())
            if (n.key == key) {
                cfg.setup.nav.*(n.field) = double_value(source, key, v);
                return;
            }
        if (key == "terrain")
            cfg.terrain = terrain_from_string(v);
        else if (key == "arena")
            cfg.arena_path = v;
        else if (key == "algorithm")
            cfg.algorithm = controller_from_string(v);
        else if (key == "seed" || key == "seeds")
            cfg.seeds = parse_seed_list(v, key);
        else if (key == "recipe")
            cfg.recipe_path = v;
        else if (key == "model")
            cfg.model_path = v;
        else if (key == "scenario")
            cfg.scenario_path = v;
        else if (key == "output_dir")
            cfg.output_dir = v;
        else if (key == "cell_size")
            cfg.cell_size = static_cast<int>(int_value(source, key, v));
        else if (key == "kernel")
            cfg.kernel = kernel_from_string(v);
        else if (key == "svm_c")
            cfg.svm_c = double_value(source, key, v);
        else if (key == "svm_epochs")
            cfg.svm_epochs = static_cast<int>(int_value(source, key, v));
        else if (key == "physics_substeps")
            cfg.setup.physics_substeps = static_cast<int>(int_value(source, key, v));
        else if (key == "start_heading_spread")
            cfg.setup.start_heading_spread_deg = double_value(source, key, v);
        else if (key == "nav_params")
            apply_nav_file(cfg, v);
        else if (key == "behavior_params")
            cfg.setup.behavior = load_behavior_params(v);
        else
            throw bad(source, key, "unknown key");
    } catch (const FormatError& e) {
        if (std::string_view(e.what()).find("key '" + std::string(key) + "'") != std::string_view::npos)
            throw;
        throw bad(source, key, e.what());
    } catch (const std::invalid_argument& e) {
        throw bad(source, key, e.what());
    }
}

RunConfig parse_config(std::string_view text, std::string_view source)
{
    const KvDocument doc = parse_kv(text, source);
    RunConfig cfg;
    for (const auto& sec : doc.sections)
        if (!sec.name.empty())
            throw FormatError(std::string(source) + ":" + std::to_string(sec.line) + ": configs are flat, found [" +
                              sec.name + "]");
    const auto& entries = doc.sections.front().entries;
    for (const auto& e : entries) {
        const bool known = std::find(config_keys().begin(), config_keys().end(), e.key) != config_keys().end() ||
                           e.key.rfind(kBehaviorPrefix, 0) == 0;
        if (!known)
            throw FormatError(std::string(source) + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
    for (const auto& e : entries)
        if (e.key == "nav_params" || e.key == "behavior_params")
            apply_config_value(cfg, e.key, e.value, source);
    for (const auto& e : entries)
        if (e.key != "nav_params" && e.key != "behavior_params")
            apply_config_value(cfg, e.key, e.value, source);
    try {
        validate(cfg.setup.nav);
        validate(cfg.setup.behavior);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string(source) + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

namespace {

std::string config_text(const RunConfig& cfg, bool with_seeds)
{
    std::ostringstream o;
    o << "terrain = " << to_string(cfg.terrain) << '\n';
    if (!cfg.arena_path.empty())
        o << "arena = " << cfg.arena_path << '\n';
    o << "algorithm = " << to_string(cfg.algorithm) << '\n';
    if (with_seeds && !cfg.seeds.empty()) {
        o << "seeds =";
        for (auto s : cfg.seeds)
            o << ' ' << s;
        o << '\n';
    }
    if (!cfg.recipe_path.empty())
        o << "recipe = " << cfg.recipe_path << '\n';
    if (!cfg.model_path.empty())
        o << "model = " << cfg.model_path << '\n';
    if (!cfg.scenario_path.empty())
        o << "scenario = " << cfg.scenario_path << '\n';
    o << "output_dir = " << cfg.output_dir << '\n';
    o << "cell_size = " << cfg.cell_size << '\n';
    o << "kernel = " << to_string(cfg.kernel) << '\n';
    o << "svm_c = " << format_double(cfg.svm_c) << '\n';
    o << "svm_epochs = " << cfg.svm_epochs << '\n';
    for (const auto& n : nav_keys())
        o << n.key << " = " << format_double(cfg.setup.nav.*(n.field)) << '\n';
    o << "physics_substeps = " << cfg.setup.physics_substeps << '\n';
    o << "start_heading_spread = " << format_double(cfg.setup.start_heading_spread_deg) << '\n';
    for (const auto name : behavior_param_names())
        o << kBehaviorPrefix << name << " = " << format_double(*behavior_param(cfg.setup.behavior, name)) << '\n';
    o << kBehaviorPrefix << kCurveKey << " = " << cfg.setup.behavior.climb_prob_vs_theta.to_text() << '\n';
    return o.str();
}

} // namespace

std::string config_to_text(const RunConfig& cfg) { return config_text(cfg, true); }

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(config_to_text(cfg)); }

std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::uint64_t> resolved_seeds(const RunConfig& cfg)
{
    if (!cfg.seeds.empty())
        return cfg.seeds;
    return {fnv1a64(config_text(cfg, false)) & 0xffffffffULL};
}

Arena config_arena(const RunConfig& cfg)
{
    if (!cfg.arena_path.empty())
        return load_arena(cfg.arena_path);
    return build_terrain(cfg.terrain);
}

} // namespace biobot
