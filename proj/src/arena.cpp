#include "biobot/arena.hpp"

#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace biobot {

std::string_view to_string(TerrainKind kind)
{
    switch (kind) {
    case TerrainKind::NoObstacle: return "NoObstacle";
    case TerrainKind::LowObstacle: return "LowObstacle";
    case TerrainKind::TallWall: return "TallWall";
    case TerrainKind::MockDisaster: return "MockDisaster";
    }
    return "?";
}

TerrainKind terrain_from_string(std::string_view name)
{
    for (auto k : {TerrainKind::NoObstacle, TerrainKind::LowObstacle, TerrainKind::TallWall, TerrainKind::MockDisaster})
        if (to_string(k) == name)
            return k;
    throw FormatError("unknown terrain '" + std::string(name) +
                      "' (expected NoObstacle, LowObstacle, TallWall or MockDisaster)");
}

namespace {

bool segment_inside(const ObstacleSegment& s, const Rect& r)
{
    return r.contains(s.a) && r.contains(s.b);
}

bool disc_inside(const Disc& d, const Rect& r) { return r.contains(d.center, d.radius); }

} // namespace

Arena::Arena(TerrainKind kind, Rect bounds, std::vector<ObstacleSegment> obstacles, Disc origin,
             std::vector<Disc> targets)
    : kind_(kind), bounds_(bounds), obstacles_(std::move(obstacles)), origin_(origin), targets_(std::move(targets))
{
    if (!(bounds_.xmax > bounds_.xmin && bounds_.ymax > bounds_.ymin))
        throw FormatError("arena bounds are empty");
    if (targets_.empty())
        throw FormatError("arena needs at least one target");
    if (!(origin_.radius > 0.0) || !disc_inside(origin_, bounds_))
        throw FormatError("origin disc must have positive radius and lie inside the bounds");
    for (std::size_t i = 0; i < targets_.size(); ++i) {
        if (!(targets_[i].radius > 0.0))
            throw FormatError("target " + std::to_string(i) + " has non-positive radius");
        if (!disc_inside(targets_[i], bounds_))
            throw FormatError("target " + std::to_string(i) + " lies outside the bounds");
        for (std::size_t j = 0; j < i; ++j)
            if (distance(targets_[i].center, targets_[j].center) < targets_[i].radius + targets_[j].radius)
                throw FormatError("targets " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
        const auto& s = obstacles_[i];
        if (!(s.length() > 0.0))
            throw FormatError("obstacle " + std::to_string(i) + " has zero length");
        if (!(s.thickness > 0.0) || !(s.height > 0.0))
            throw FormatError("obstacle " + std::to_string(i) + " needs positive height and thickness");
        if (!segment_inside(s, bounds_))
            throw FormatError("obstacle " + std::to_string(i) + " lies outside the bounds");
    }
}

Arena build_terrain(TerrainKind kind)
{
    const Disc origin{{0.0, 0.0}, kNavigationDiscRadius};
    switch (kind) {
    case TerrainKind::NoObstacle:
        return Arena(kind, Rect{-30.0, -45.0, 95.0, 45.0}, {}, origin,
                     {Disc{{kOpenFieldDistance, 0.0}, kNavigationDiscRadius}});
    case TerrainKind::LowObstacle:
    case TerrainKind::TallWall: {
        const bool low = kind == TerrainKind::LowObstacle;
        const double height = low ? kLowObstacleHeight : kTallWallHeight;
        const double thick = low ? kLowObstacleThickness : kTallWallThickness;
        const double h = 0.5 * thick;
        // Enclosure centred on the destination, entrance in the middle of the far wall.
        const double x0 = kObstacleFieldDistance - 0.5 * kEnclosureLength + h;
        const double x1 = kObstacleFieldDistance + 0.5 * kEnclosureLength - h;
        const double y1 = 0.5 * kEnclosureWidth - h;
        const double gap = 0.5 * kEntranceWidth + h;
        std::vector<ObstacleSegment> walls{
            {{x0, -y1}, {x0, y1}, height, thick},  // near wall, faces the origin
            {{x0, y1}, {x1, y1}, height, thick},   // left side
            {{x0, -y1}, {x1, -y1}, height, thick}, // right side
            {{x1, y1}, {x1, gap}, height, thick},  // far wall, upper half
            {{x1, -gap}, {x1, -y1}, height, thick} // far wall, lower half
        };
        return Arena(kind, Rect{-30.0, -45.0, 80.0, 45.0}, std::move(walls), origin,
                     {Disc{{kObstacleFieldDistance, 0.0}, kNavigationDiscRadius}});
    }
    case TerrainKind::MockDisaster:
        break;
    }
    throw FormatError("MockDisaster terrain needs an explicit spec");
}

Arena build_mock_disaster(const MockDisasterSpec& spec)
{
    return Arena(TerrainKind::MockDisaster, spec.bounds, spec.obstacles, spec.origin, spec.targets);
}

double acute_angle_deg(double heading_deg, const ObstacleSegment& seg)
{
    const Vec2 d = unit_from_deg(heading_deg);
    const Vec2 t = seg.tangent();
    // atan2 keeps precision near 0 and 90 degrees.
    return rad2deg(std::atan2(std::abs(cross(d, t)), std::abs(dot(d, t))));
}

std::optional<ObstacleAngle> nearest_obstacle_angle(const Pose& pose, const Arena& arena)
{
    std::optional<ObstacleAngle> best;
    double best_clear = std::numeric_limits<double>::infinity();
    const auto& obs = arena.obstacles();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double c = obs[i].clearance(pose.position);
        if (c < best_clear) {
            best_clear = c;
            best = ObstacleAngle{acute_angle_deg(pose.heading_deg, obs[i]), i};
        }
    }
    return best;
}

BodySegment body_segment(const Pose& pose, double body_length)
{
    const Vec2 half = pose.direction() * (0.5 * body_length);
    return {pose.position - half, pose.position + half};
}

std::optional<Contact> segment_contact(const Pose& pose, double body_length, const ObstacleSegment& seg,
                                       std::size_t id, double skin)
{
    const auto body = body_segment(pose, body_length);
    const auto cp = closest_points(body.posterior, body.anterior, seg.a, seg.b);
    const double h = seg.half_thickness();
    if (cp.distance - h > skin)
        return std::nullopt;
    Contact c;
    c.segment = id;
    c.tangent = seg.tangent();
    if (cp.distance > 1e-12) {
        c.normal = (cp.on_first - cp.on_second) / cp.distance;
    } else {
        // Body crosses the centreline: push toward the side holding the body centre.
        c.normal = c.tangent.perp();
        if (dot(pose.position - seg.a, c.normal) < 0.0)
            c.normal = -c.normal;
    }
    c.penetration = std::max(0.0, h - cp.distance);
    return c;
}

std::optional<Contact> contact_query(const Pose& pose, double body_length, const Arena& arena,
                                     std::optional<std::size_t> ignore, double skin)
{
    std::optional<Contact> best;
    double best_clear = std::numeric_limits<double>::infinity();
    const auto& obs = arena.obstacles();
    const auto body = body_segment(pose, body_length);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (ignore && *ignore == i)
            continue;
        const double clear =
            closest_points(body.posterior, body.anterior, obs[i].a, obs[i].b).distance - obs[i].half_thickness();
        if (clear > skin || clear >= best_clear)
            continue;
        best_clear = clear;
        best = segment_contact(pose, body_length, obs[i], i, skin);
    }
    return best;
}

std::optional<Contact> boundary_contact(const Pose& pose, double body_length, const Arena& arena, double skin)
{
    const auto body = body_segment(pose, body_length);
    const Rect& r = arena.bounds();
    std::optional<Contact> best;
    double best_clear = std::numeric_limits<double>::infinity();
    auto consider = [&](double clear, std::size_t side, Vec2 normal) {
        if (clear > skin || clear >= best_clear)
            return;
        best_clear = clear;
        best = Contact{side, true, normal.perp(), normal, std::max(0.0, -clear)};
    };
    for (const Vec2& p : {body.posterior, body.anterior}) {
        consider(p.x - r.xmin, 0, {1.0, 0.0});
        consider(r.xmax - p.x, 1, {-1.0, 0.0});
        consider(p.y - r.ymin, 2, {0.0, 1.0});
        consider(r.ymax - p.y, 3, {0.0, -1.0});
    }
    return best;
}

std::optional<EnclosureDims> measure_enclosure(const Arena& arena)
{
    const auto& obs = arena.obstacles();
    if (obs.empty())
        return std::nullopt;
    EnclosureDims d;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300, far_x = -1e300;
    for (const auto& s : obs) {
        const double h = s.half_thickness();
        xmin = std::min({xmin, s.a.x - h, s.b.x - h});
        xmax = std::max({xmax, s.a.x + h, s.b.x + h});
        ymin = std::min({ymin, s.a.y - h, s.b.y - h});
        ymax = std::max({ymax, s.a.y + h, s.b.y + h});
        far_x = std::max({far_x, s.a.x, s.b.x});
        d.height = s.height;
        d.thickness = s.thickness;
    }
    d.length = xmax - xmin;
    d.width = ymax - ymin;
    // Entrance: widest opening between capsules lying on the far wall.
    std::vector<std::pair<double, double>> spans;
    for (const auto& s : obs)
        if (s.a.x == far_x && s.b.x == far_x) {
            const double h = s.half_thickness();
            spans.emplace_back(std::min(s.a.y, s.b.y) - h, std::max(s.a.y, s.b.y) + h);
        }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        d.entrance = std::max(d.entrance, spans[i].first - spans[i - 1].second);
    return d;
}

namespace {

std::string pair_text(const Vec2& v) { return format_double(v.x) + " " + format_double(v.y); }

Vec2 read_pair(const KvSection& s, std::string_view key)
{
    const auto v = s.get_doubles(key);
    if (v.size() != 2)
        throw FormatError("key '" + std::string(key) + "' at line " + std::to_string(s.find(key)->line) +
                          ": expected two numbers");
    return {v[0], v[1]};
}

Disc read_disc(const KvSection& s)
{
    s.require_known({"center", "radius"});
    return Disc{read_pair(s, "center"), s.get_double("radius")};
}

} // namespace

std::string arena_to_text(const Arena& arena)
{
    std::ostringstream o;
    o << "# biobot arena v1\n";
    if (const auto dims = measure_enclosure(arena); dims && arena.kind() != TerrainKind::MockDisaster) {
        o << "# enclosure: length " << format_double(dims->length) << " cm, width " << format_double(dims->width)
          << " cm, entrance " << format_double(dims->entrance) << " cm (outer extents of wall capsules)\n";
        o << "# layout assumption: box centred on the destination, entrance centred in the far wall\n";
    }
    const Rect& b = arena.bounds();
    o << "[arena]\nkind = " << to_string(arena.kind()) << "\nbounds = " << format_double(b.xmin) << ' '
      << format_double(b.ymin) << ' ' << format_double(b.xmax) << ' ' << format_double(b.ymax) << "\n\n";
    o << "[origin]\ncenter = " << pair_text(arena.origin().center)
      << "\nradius = " << format_double(arena.origin().radius) << "\n\n";
    for (const auto& t : arena.targets())
        o << "[target]\ncenter = " << pair_text(t.center) << "\nradius = " << format_double(t.radius) << "\n\n";
    for (const auto& s : arena.obstacles())
        o << "[obstacle]\na = " << pair_text(s.a) << "\nb = " << pair_text(s.b)
          << "\nheight = " << format_double(s.height) << "  # cm\nthickness = " << format_double(s.thickness)
          << "  # cm\n\n";
    return o.str();
}

Arena arena_from_text(std::string_view text, std::string_view source)
{
    return arena_from_kv(parse_kv(text, source), source);
}

Arena arena_from_kv(const KvDocument& doc, std::string_view source, const std::vector<std::string_view>& extra_sections)
{
    const KvSection* head = doc.first("arena");
    if (!head)
        throw FormatError(std::string(source) + ": missing [arena] section");
    head->require_known({"kind", "bounds"});
    const auto bv = head->get_doubles("bounds");
    if (bv.size() != 4)
        throw FormatError("key 'bounds': expected xmin ymin xmax ymax");
    const KvSection* origin = doc.first("origin");
    if (!origin)
        throw FormatError(std::string(source) + ": missing [origin] section");
    std::vector<Disc> targets;
    for (const auto* t : doc.all("target"))
        targets.push_back(read_disc(*t));
    std::vector<ObstacleSegment> obstacles;
    for (const auto* s : doc.all("obstacle")) {
        s->require_known({"a", "b", "height", "thickness"});
        obstacles.push_back({read_pair(*s, "a"), read_pair(*s, "b"), s->get_double("height"),
                             s->get_double("thickness")});
    }
    if (!doc.sections.front().entries.empty())
        throw FormatError(std::string(source) + ": key '" + doc.sections.front().entries.front().key +
                          "' outside any section");
    for (const auto& s : doc.sections)
        if (!s.name.empty() && s.name != "arena" && s.name != "origin" && s.name != "target" && s.name != "obstacle" &&
            std::find(extra_sections.begin(), extra_sections.end(), s.name) == extra_sections.end())
            throw FormatError(std::string(source) + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    const TerrainKind kind = head->has("kind") ? terrain_from_string(head->get("kind")) : TerrainKind::MockDisaster;
    return Arena(kind, Rect{bv[0], bv[1], bv[2], bv[3]}, std::move(obstacles), read_disc(*origin), std::move(targets));
}

Arena load_arena(const std::string& path)
{
    return arena_from_text(read_text_file(path), path);
}

} // namespace biobot
