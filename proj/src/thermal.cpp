#include "biobot/thermal.hpp"

#include "biobot/geometry.hpp"
#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <cstdio>
#include <stdexcept>
#include <tuple>
#include <type_traits>

namespace biobot {

ThermalImage uniform_image(double value)
{
    ThermalImage img;
    img.px.fill(value);
    return img;
}

std::string_view to_string(SubjectKind k) { return k == SubjectKind::Human ? "Human" : "HotObject"; }

bool Primitive::contains(double u, double z) const
{
    const double du = (u - u_cm) / half_w_cm;
    const double dz = (z - z_cm) / half_h_cm;
    if (shape == PrimitiveShape::Rect)
        return std::abs(du) <= 1.0 && std::abs(dz) <= 1.0;
    return du * du + dz * dz <= 1.0;
}

namespace {

constexpr int kSub = 3; // subsamples per pixel side

struct Ray {
    double cos_el;
    double sin_el;
    double az_rad;
};

// Temperature seen along a ray, or nullopt for background.
std::optional<double> trace(const std::vector<const ThermalSubject*>& order, const Ray& ray, double cam_h)
{
    for (const ThermalSubject* s : order) {
        const double a = ray.az_rad - deg2rad(s->bearing_deg);
        const double dx = ray.cos_el * std::cos(a);
        if (dx <= 1e-9)
            continue;
        const double t = s->distance_m * 100.0 / dx;
        const double u = t * ray.cos_el * std::sin(a);
        const double z = cam_h + t * ray.sin_el;
        std::optional<double> hit;
        for (const auto& p : s->parts)
            if (p.contains(u, z))
                hit = hit ? std::max(*hit, p.temp_c) : p.temp_c;
        if (hit)
            return hit;
    }
    return std::nullopt;
}

} // namespace

ThermalImage render_frame(const SceneSpec& scene, Rng& rng)
{
    if (scene.noise_sd < 0.0 || scene.ambient_sd < 0.0 || scene.salt_pepper < 0.0 || scene.salt_pepper > 1.0)
        throw std::invalid_argument("render_frame: negative noise or salt_pepper outside [0, 1]");
    std::vector<const ThermalSubject*> order;
    for (const auto& s : scene.subjects) {
        if (!(s.distance_m > 0.0) || std::abs(wrap_deg(s.bearing_deg)) >= 90.0)
            throw std::invalid_argument("render_frame: subject '" + s.id + "' is behind the camera");
        order.push_back(&s);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const ThermalSubject* a, const ThermalSubject* b) { return a->distance_m < b->distance_m; });

    ThermalImage img;
    img.timestamp_s = scene.timestamp_s;
    if (!scene.subjects.empty()) {
        img.distance_m = order.front()->distance_m;
        img.subject_id = order.front()->id;
    }
    const double half = 0.5 * kThermalFovDeg;
    for (int r = 0; r < kThermalSize; ++r) {
        for (int c = 0; c < kThermalSize; ++c) {
            double sum = 0.0;
            int background = 0;
            for (int i = 0; i < kSub; ++i) {
                const double el = deg2rad(half - (r + (i + 0.5) / kSub) * kThermalPixelDeg);
                for (int j = 0; j < kSub; ++j) {
                    const double az = deg2rad(half - (c + (j + 0.5) / kSub) * kThermalPixelDeg);
                    if (const auto t = trace(order, Ray{std::cos(el), std::sin(el), az}, scene.camera_height_cm))
                        sum += *t;
                    else
                        ++background;
                }
            }
            double bg = scene.ambient_c;
            if (background > 0 && scene.ambient_sd > 0.0)
                bg = gaussian(rng, scene.ambient_c, scene.ambient_sd);
            img.at(r, c) = (sum + background * bg) / (kSub * kSub);
        }
    }
    if (scene.noise_sd > 0.0)
        for (double& v : img.px)
            v += gaussian(rng, 0.0, scene.noise_sd);
    if (scene.salt_pepper > 0.0)
        for (double& v : img.px)
            if (uniform01(rng) < scene.salt_pepper)
                v = scene.ambient_c + (uniform01(rng) < 0.5 ? scene.outlier_delta_c : -scene.outlier_delta_c);
    return img;
}

const std::vector<SubjectTemplate>& subject_catalog()
{
    static const std::vector<SubjectTemplate> catalog{
        {"oven", SubjectKind::HotObject, 46, 33, 29, 0},
        {"laptop_acer", SubjectKind::HotObject, 35, 24, 3.5, 0},
        {"monitor_19", SubjectKind::HotObject, 41, 41, 14, 0},
        {"human1", SubjectKind::Human, 40, 166, 24, 166},
        {"human2", SubjectKind::Human, 40, 166, 24, 166},
        {"microwave", SubjectKind::HotObject, 48, 32, 28, 0},
        {"monitor_21", SubjectKind::HotObject, 51, 41, 23, 0},
        {"lamp", SubjectKind::HotObject, 44, 44, 16, 0},
        {"laptop_dell", SubjectKind::HotObject, 38, 25, 2.5, 0},
        {"human3", SubjectKind::Human, 40, 166, 24, 172},
    };
    return catalog;
}

const SubjectTemplate& find_subject(std::string_view id)
{
    for (const auto& t : subject_catalog())
        if (t.id == id)
            return t;
    throw std::invalid_argument("unknown subject '" + std::string(id) + "'");
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Primitive rect(double u, double z, double hw, double hh, double t)
{
    return {PrimitiveShape::Rect, u, z, std::max(hw, 0.5), std::max(hh, 0.5), t};
}

Primitive ellipse(double u, double z, double hw, double hh, double t)
{
    return {PrimitiveShape::Ellipse, u, z, std::max(hw, 0.5), std::max(hh, 0.5), t};
}

// Apparent half width of a box of width w and depth d turned by the given cos/sin.
double box_half(double w, double d, double c, double s) { return 0.5 * (w * c + d * s); }

std::vector<Primitive> human_parts(const SubjectTemplate& tpl, double c, double s, Rng& rng)
{
    const double head_t = uniform(rng, 34.0, 36.0);
    const double torso_t = uniform(rng, 30.0, 34.0);
    const double limb_t = uniform(rng, 29.0, 32.0);
    const double arm_t = uniform(rng, 31.0, 34.0);
    const double torso_hw = box_half(tpl.width_cm, tpl.depth_cm, c, s);
    const double head_hw = 8.0 * c + 10.0 * s;
    std::vector<Primitive> p;
    if (uniform01(rng) < 0.5) {
        const double H = uniform(rng, tpl.height_cm, std::max(tpl.height_cm, tpl.height_max_cm));
        p.push_back(ellipse(0, H - 12, head_hw, 12, head_t));
        p.push_back(ellipse(0, H - 56, torso_hw, 33, torso_t));
        const double leg_h = 0.5 * (H - 86.0);
        p.push_back(rect(9.0 * c, leg_h, 8.0, leg_h, limb_t));
        p.push_back(rect(-9.0 * c, leg_h, 8.0, leg_h, limb_t));
        const double arm_u = (torso_hw + 3.0) * c;
        p.push_back(rect(arm_u, H - 58, 5.0, 29, arm_t));
        p.push_back(rect(-arm_u, H - 58, 5.0, 29, arm_t));
    } else {
        const double H = uniform(rng, 86.0, 94.0);
        p.push_back(ellipse(0, H - 12, head_hw, 12, head_t));
        p.push_back(ellipse(0, H - 50, torso_hw, 28, torso_t));
        p.push_back(ellipse(0, 11, (torso_hw + 6.0) * c + 26.0 * s, 11, limb_t));
        const double arm_u = (torso_hw + 2.0) * c;
        p.push_back(rect(arm_u, H - 52, 5.0, 22, arm_t));
        p.push_back(rect(-arm_u, H - 52, 5.0, 22, arm_t));
    }
    return p;
}

std::vector<Primitive> object_parts(const SubjectTemplate& tpl, double c, double s, Rng& rng)
{
    const double T = uniform(rng, 30.0, 45.0);
    const double w = tpl.width_cm, h = tpl.height_cm, d = tpl.depth_cm;
    std::vector<Primitive> p;
    if (tpl.id == "lamp") {
        p.push_back(ellipse(0, 2, 8.0, 2.0, T - 4.0));
        p.push_back(rect(0, 2 + 0.5 * (h - 14), 1.5, 0.5 * (h - 14), T - 6.0));
        p.push_back(ellipse(0, h - 7, 0.5 * (22.0 * c + d * s), 7, T));
    } else if (tpl.id.rfind("laptop", 0) == 0) {
        p.push_back(rect(0, 0.5 * d, box_half(w, h, c, s), 0.5 * d, T));
        p.push_back(rect(0, d + 0.5 * h, box_half(w, 1.0, c, s), 0.5 * h, T - 3.0));
    } else if (tpl.id.rfind("monitor", 0) == 0) {
        const double stand = 0.25 * h;
        p.push_back(rect(0, 0.5 * stand, 4.0, 0.5 * stand, T - 5.0));
        p.push_back(rect(0, stand + 0.5 * (h - stand), box_half(w, d, c, s), 0.5 * (h - stand), T));
    } else {
        const double hw = box_half(w, d, c, s);
        p.push_back(rect(0, 0.5 * h, hw, 0.5 * h, T));
        if (c > 0.5)
            p.push_back(rect(-0.15 * hw, 0.45 * h, 0.55 * hw, 0.3 * h, T + 3.0));
    }
    return p;
}

} // namespace

ThermalSubject make_subject(const SubjectTemplate& tpl, double rotation_deg, double distance_m, Rng& rng)
{
    const double c = std::abs(std::cos(deg2rad(rotation_deg)));
    const double s = std::abs(std::sin(deg2rad(rotation_deg)));
    ThermalSubject subj;
    subj.id = tpl.id;
    subj.kind = tpl.kind;
    subj.distance_m = distance_m;
    subj.parts = tpl.kind == SubjectKind::Human ? human_parts(tpl, c, s, rng) : object_parts(tpl, c, s, rng);
    return subj;
}

// Recipes -------------------------------------------------------------------

namespace {

std::vector<std::string> words(std::string_view text)
{
    std::string s(text);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

std::pair<double, double> range_value(const KvSection& sec, std::string_view key, std::pair<double, double> fallback)
{
    if (!sec.has(key))
        return fallback;
    const auto v = sec.get_doubles(key);
    if (v.size() == 1)
        return {v[0], v[0]};
    if (v.size() != 2 || v[0] > v[1])
        throw FormatError("key '" + std::string(key) + "': expected 'min max'");
    return {v[0], v[1]};
}

} // namespace

DatasetRecipe recipe_from_text(std::string_view text, std::string_view source)
{
    const KvDocument doc = parse_kv(text, source);
    if (doc.sections.size() != 1 || !doc.sections[0].name.empty())
        throw FormatError(std::string(source) + ": recipes take plain key = value lines only");
    const KvSection& sec = doc.sections[0];
    sec.require_known({"name", "subjects", "distances_m", "rotations", "human_images", "nonhuman_images", "scale",
                       "ambient_c", "ambient_sd", "camera_height_cm", "bearing_jitter_deg", "noise_sd",
                       "salt_pepper"});
    DatasetRecipe r;
    if (sec.has("name"))
        r.name = trim(sec.get("name"));
    r.subjects = words(sec.get("subjects"));
    for (const auto& s : r.subjects)
        try {
            find_subject(s);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string(source) + ": subjects: " + e.what());
        }
    r.distances_m = sec.get_doubles("distances_m");
    r.rotations = static_cast<int>(sec.has("rotations") ? parse_int(sec.get("rotations"), "rotations") : 0);
    r.human_images = sec.get_double("human_images", 0.0);
    r.nonhuman_images = sec.get_double("nonhuman_images", 0.0);
    r.scale = sec.get_double("scale", 1.0);
    std::tie(r.ambient_min_c, r.ambient_max_c) = range_value(sec, "ambient_c", {r.ambient_min_c, r.ambient_max_c});
    r.ambient_sd = sec.get_double("ambient_sd", r.ambient_sd);
    std::tie(r.camera_height_min_cm, r.camera_height_max_cm) =
        range_value(sec, "camera_height_cm", {r.camera_height_min_cm, r.camera_height_max_cm});
    r.bearing_jitter_deg = sec.get_double("bearing_jitter_deg", r.bearing_jitter_deg);
    r.noise_sd = sec.get_double("noise_sd", r.noise_sd);
    r.salt_pepper = sec.get_double("salt_pepper", r.salt_pepper);
    for (double d : r.distances_m)
        if (!(d > 0.0))
            throw FormatError(std::string(source) + ": distances_m must be positive");
    if (r.rotations < 0 || r.human_images < 0 || r.nonhuman_images < 0 || !(r.scale > 0))
        throw FormatError(std::string(source) + ": counts must be non-negative and scale positive");
    return r;
}

DatasetRecipe load_recipe(const std::string& path) { return recipe_from_text(read_text_file(path), path); }

std::string recipe_to_text(const DatasetRecipe& r)
{
    std::ostringstream o;
    auto list = [](const auto& v) {
        std::string s;
        for (const auto& x : v) {
            if (!s.empty())
                s += ' ';
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>)
                s += x;
            else
                s += format_double(x);
        }
        return s;
    };
    o << "name = " << r.name << '\n'
      << "subjects = " << list(r.subjects) << '\n'
      << "distances_m = " << list(r.distances_m) << '\n';
    if (r.rotations > 0)
        o << "rotations = " << r.rotations << '\n';
    if (r.human_images > 0 || r.nonhuman_images > 0)
        o << "human_images = " << format_double(r.human_images) << '\n'
          << "nonhuman_images = " << format_double(r.nonhuman_images) << '\n'
          << "scale = " << format_double(r.scale) << '\n';
    o << "ambient_c = " << format_double(r.ambient_min_c) << ' ' << format_double(r.ambient_max_c) << '\n'
      << "ambient_sd = " << format_double(r.ambient_sd) << '\n'
      << "camera_height_cm = " << format_double(r.camera_height_min_cm) << ' '
      << format_double(r.camera_height_max_cm) << '\n'
      << "bearing_jitter_deg = " << format_double(r.bearing_jitter_deg) << '\n'
      << "noise_sd = " << format_double(r.noise_sd) << '\n'
      << "salt_pepper = " << format_double(r.salt_pepper) << '\n';
    return o.str();
}

std::vector<LabeledImage> synth_dataset(const DatasetRecipe& recipe, std::uint64_t seed)
{
    if (recipe.subjects.empty() || recipe.distances_m.empty())
        throw std::invalid_argument("synth_dataset: recipe '" + recipe.name + "' has no subjects or distances");

    struct Job {
        const SubjectTemplate* tpl;
        double distance_m;
        std::optional<double> rotation_deg;
    };
    std::vector<Job> jobs;
    if (recipe.rotations > 0) {
        for (const auto& id : recipe.subjects)
            for (double d : recipe.distances_m)
                for (int k = 0; k < recipe.rotations; ++k)
                    jobs.push_back({&find_subject(id), d, 360.0 * k / recipe.rotations});
    } else {
        for (auto kind : {SubjectKind::Human, SubjectKind::HotObject}) {
            std::vector<const SubjectTemplate*> pool;
            for (const auto& id : recipe.subjects)
                if (find_subject(id).kind == kind)
                    pool.push_back(&find_subject(id));
            const double want = kind == SubjectKind::Human ? recipe.human_images : recipe.nonhuman_images;
            const auto n = static_cast<std::size_t>(std::llround(want * recipe.scale));
            if (n > 0 && pool.empty())
                throw std::invalid_argument("synth_dataset: recipe '" + recipe.name + "' asks for " +
                                            std::string(to_string(kind)) + " images but lists no such subject");
            const std::size_t combos = pool.size() * recipe.distances_m.size();
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = i % combos;
                jobs.push_back({pool[k % pool.size()], recipe.distances_m[(k / pool.size()) % recipe.distances_m.size()],
                                std::nullopt});
            }
        }
    }
    if (jobs.empty())
        throw std::invalid_argument("synth_dataset: recipe '" + recipe.name + "' yields no images");

    std::vector<LabeledImage> out;
    out.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        Rng rng = make_rng(seed, i);
        const Job& j = jobs[i];
        const double rot = j.rotation_deg ? *j.rotation_deg : uniform(rng, 0.0, 360.0);
        SceneSpec scene;
        scene.ambient_c = uniform(rng, recipe.ambient_min_c, recipe.ambient_max_c);
        scene.ambient_sd = recipe.ambient_sd;
        scene.camera_height_cm = uniform(rng, recipe.camera_height_min_cm, recipe.camera_height_max_cm);
        scene.noise_sd = recipe.noise_sd;
        scene.salt_pepper = recipe.salt_pepper;
        ThermalSubject subj = make_subject(*j.tpl, rot, j.distance_m, rng);
        subj.bearing_deg = uniform(rng, -recipe.bearing_jitter_deg, recipe.bearing_jitter_deg);
        scene.subjects.push_back(std::move(subj));
        ThermalImage img = render_frame(scene, rng);
        img.timestamp_s = static_cast<double>(i);
        out.push_back({std::move(img), j.tpl->kind == SubjectKind::Human});
    }
    return out;
}

// Files ---------------------------------------------------------------------

std::string image_to_text(const ThermalImage& img)
{
    std::ostringstream o;
    o << "# distance_m=" << format_double(img.distance_m) << " subject=" << (img.subject_id.empty() ? "-" : img.subject_id)
      << " t=" << format_double(img.timestamp_s) << '\n';
    for (int r = 0; r < kThermalSize; ++r) {
        for (int c = 0; c < kThermalSize; ++c)
            o << (c ? "," : "") << format_double(img.at(r, c));
        o << '\n';
    }
    return o.str();
}

ThermalImage image_from_text(std::string_view text, std::string_view source)
{
    ThermalImage img;
    std::istringstream in{std::string(text)};
    std::string line;
    int row = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t[0] == '#') {
            std::istringstream meta(t.substr(1));
            std::string kv;
            while (meta >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    continue;
                const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
                if (k == "distance_m")
                    img.distance_m = parse_double(v, k);
                else if (k == "subject")
                    img.subject_id = v == "-" ? "" : v;
                else if (k == "t")
                    img.timestamp_s = parse_double(v, k);
            }
            continue;
        }
        if (row >= kThermalSize)
            throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": more than 32 rows");
        const auto vals = parse_doubles(t, "pixel");
        if (vals.size() != kThermalSize)
            throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": expected 32 values, got " +
                              std::to_string(vals.size()));
        for (int c = 0; c < kThermalSize; ++c)
            img.at(row, c) = vals[static_cast<std::size_t>(c)];
        ++row;
    }
    if (row != kThermalSize)
        throw FormatError(std::string(source) + ": expected 32 rows, got " + std::to_string(row));
    return img;
}

std::string write_dataset(const std::vector<LabeledImage>& data, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    const fs::path manifest = fs::path(dir) / "manifest.csv";
    std::ofstream m(manifest);
    if (!m)
        throw std::runtime_error("cannot write " + manifest.string());
    m << "path,label,distance_m,subject_id\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%05zu.txt", i);
        const fs::path rel = fs::path("images") / name;
        std::ofstream f(fs::path(dir) / rel);
        if (!f)
            throw std::runtime_error("cannot write " + (fs::path(dir) / rel).string());
        f << image_to_text(data[i].image);
        m << rel.generic_string() << ',' << (data[i].human ? "human" : "nonhuman") << ','
          << format_double(data[i].image.distance_m) << ',' << data[i].image.subject_id << '\n';
    }
    return manifest.string();
}

std::vector<ManifestEntry> read_manifest(const std::string& path)
{
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<ManifestEntry> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || (lineno == 1 && t.rfind("path,", 0) == 0))
            continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream row(t);
        while (std::getline(row, cell, ','))
            f.push_back(trim(cell));
        if (f.size() != 4)
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected path,label,distance_m,subject_id");
        if (f[1] != "human" && f[1] != "nonhuman")
            throw FormatError(path + ":" + std::to_string(lineno) + ": label must be human or nonhuman");
        out.push_back({f[0], f[1] == "human", parse_double(f[2], "distance_m"), f[3]});
    }
    return out;
}

std::vector<LabeledImage> load_dataset(const std::string& manifest_path)
{
    namespace fs = std::filesystem;
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<LabeledImage> out;
    for (const auto& e : read_manifest(manifest_path)) {
        const fs::path p = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
        ThermalImage img = image_from_text(read_text_file(p.string()), p.string());
        img.distance_m = e.distance_m;
        img.subject_id = e.subject_id;
        out.push_back({std::move(img), e.human});
    }
    return out;
}

} // namespace biobot
