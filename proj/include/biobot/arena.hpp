#pragma once
/**
 * @file arena.hpp
 * @brief Static terrains and the geometric queries the agent and sensors rely on.
 *
 * Obstacles are thick segments: the solid region is every point within
 * thickness/2 of the centreline (a capsule). Preset dimensions are outer
 * extents measured over those capsules.
 */

#include "biobot/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

enum class TerrainKind { NoObstacle, LowObstacle, TallWall, MockDisaster };

std::string_view to_string(TerrainKind kind);
TerrainKind terrain_from_string(std::string_view name);

/// Obstacles at or below this height can be climbed by the agent.
inline constexpr double kClimbableMaxHeight = 3.0;

inline constexpr double kLowObstacleHeight = 1.5;
inline constexpr double kLowObstacleThickness = 2.5;
inline constexpr double kTallWallHeight = 10.0;
inline constexpr double kTallWallThickness = 0.3;
inline constexpr double kEnclosureLength = 31.0;
inline constexpr double kEnclosureWidth = 24.0;
inline constexpr double kEntranceWidth = 8.0;
inline constexpr double kOpenFieldDistance = 65.0;
inline constexpr double kObstacleFieldDistance = 45.0;
inline constexpr double kNavigationDiscRadius = 5.0;
inline constexpr double kMissionTargetRadius = 8.0;

struct Rect {
    double xmin{0.0}, ymin{0.0}, xmax{0.0}, ymax{0.0};

    bool contains(const Vec2& p, double margin = 0.0) const
    {
        return p.x >= xmin + margin && p.x <= xmax - margin && p.y >= ymin + margin && p.y <= ymax - margin;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

struct Disc {
    Vec2 center;
    double radius{0.0};

    bool contains(const Vec2& p) const { return distance(p, center) <= radius; }
};

struct ObstacleSegment {
    Vec2 a;
    Vec2 b;
    double height{kTallWallHeight};
    double thickness{kTallWallThickness};

    bool climbable() const { return height <= kClimbableMaxHeight; }
    double length() const { return distance(a, b); }
    double half_thickness() const { return 0.5 * thickness; }
    Vec2 tangent() const { return (b - a).normalized(); }
    /// Signed clearance of a point from the solid capsule (negative inside).
    double clearance(const Vec2& p) const { return point_segment_distance(p, a, b) - half_thickness(); }
};

/// Deepest overlap between the agent body and an obstacle (or the arena boundary).
struct Contact {
    std::size_t segment{0};
    bool boundary{false};
    Vec2 tangent;     ///< unit, along the obstacle
    Vec2 normal;      ///< unit, pointing out of the obstacle toward the body
    double penetration{0.0};
};

struct MockDisasterSpec {
    Rect bounds;
    Disc origin;
    std::vector<Disc> targets;
    std::vector<ObstacleSegment> obstacles;
};

/// Immutable terrain. Constructor validates every invariant and throws FormatError.
class Arena {
  public:
    Arena(TerrainKind kind, Rect bounds, std::vector<ObstacleSegment> obstacles, Disc origin,
          std::vector<Disc> targets);

    TerrainKind kind() const { return kind_; }
    const Rect& bounds() const { return bounds_; }
    const std::vector<ObstacleSegment>& obstacles() const { return obstacles_; }
    const Disc& origin() const { return origin_; }
    const std::vector<Disc>& targets() const { return targets_; }
    /// Final target of the terrain (the navigation destination).
    const Disc& destination() const { return targets_.back(); }

  private:
    TerrainKind kind_;
    Rect bounds_;
    std::vector<ObstacleSegment> obstacles_;
    Disc origin_;
    std::vector<Disc> targets_;
};

/// Preset terrains; MockDisaster needs a spec and is rejected here.
Arena build_terrain(TerrainKind kind);
Arena build_mock_disaster(const MockDisasterSpec& spec);

struct ObstacleAngle {
    double theta_deg{0.0}; ///< acute angle between body axis and segment, [0, 90]
    std::size_t segment{0};
};

std::optional<ObstacleAngle> nearest_obstacle_angle(const Pose& pose, const Arena& arena);

/// Acute angle between a heading and a segment direction, degrees in [0, 90].
double acute_angle_deg(double heading_deg, const ObstacleSegment& seg);

/// Body is the segment from posterior (center - L/2 dir) to anterior (center + L/2 dir).
struct BodySegment {
    Vec2 posterior;
    Vec2 anterior;
};
BodySegment body_segment(const Pose& pose, double body_length);

std::optional<Contact> segment_contact(const Pose& pose, double body_length, const ObstacleSegment& seg,
                                       std::size_t id, double skin = 0.0);

/// Deepest contact against obstacles; a contact exists when clearance <= skin.
std::optional<Contact> contact_query(const Pose& pose, double body_length, const Arena& arena,
                                     std::optional<std::size_t> ignore = std::nullopt, double skin = 0.0);

/// Contact of the body endpoints with the arena's bounding rectangle.
std::optional<Contact> boundary_contact(const Pose& pose, double body_length, const Arena& arena,
                                        double skin = 0.0);

/// Outer dimensions of a preset enclosure, re-measured from geometry.
struct EnclosureDims {
    double length{0.0};
    double width{0.0};
    double entrance{0.0};
    double height{0.0};
    double thickness{0.0};
};
std::optional<EnclosureDims> measure_enclosure(const Arena& arena);

// Text format (see docs/formats.md).
std::string arena_to_text(const Arena& arena);
Arena arena_from_text(std::string_view text, std::string_view source = "<arena>");
struct KvDocument;
/// As arena_from_text, additionally tolerating the named sections (left to the caller).
Arena arena_from_kv(const KvDocument& doc, std::string_view source, const std::vector<std::string_view>& extra_sections = {});
Arena load_arena(const std::string& path);

} // namespace biobot
