#pragma once
/**
 * @file geometry.hpp
 * @brief Planar vector/pose primitives shared by every module.
 *
 * Conventions:
 * - Arena frame is planar x-y in centimetres.
 * - Headings are degrees, counterclockwise from +x.
 */

#include <algorithm>
#include <cmath>
#include <limits>

namespace biobot {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-180, 180].
inline double wrap_deg(double a)
{
    a = std::fmod(a, 360.0);
    if (a <= -180.0)
        a += 360.0;
    else if (a > 180.0)
        a -= 360.0;
    return a;
}

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(const Vec2& o)
    {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2& operator-=(const Vec2& o)
    {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
    /// Left-hand perpendicular (rotated +90 degrees).
    constexpr Vec2 perp() const { return {-y, x}; }
    Vec2 normalized() const
    {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
    }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product; positive when b is counterclockwise of a.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 unit_from_deg(double heading_deg)
{
    const double r = deg2rad(heading_deg);
    return {std::cos(r), std::sin(r)};
}

inline Vec2 rotate(const Vec2& v, double deg)
{
    const double r = deg2rad(deg);
    const double c = std::cos(r), s = std::sin(r);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Agent position (cm) and heading (deg, CCW from +x).
struct Pose {
    Vec2 position;
    double heading_deg{0.0};

    Vec2 direction() const { return unit_from_deg(heading_deg); }
    bool operator==(const Pose&) const = default;
};

inline Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 <= 0.0)
        return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    return distance(p, closest_point_on_segment(p, a, b));
}

struct ClosestPoints {
    Vec2 on_first;
    Vec2 on_second;
    double distance{0.0};
};

/// Closest points between segments [p0,p1] and [q0,q1]; exact, including crossings.
inline ClosestPoints closest_points(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1)
{
    const Vec2 r = p1 - p0;
    const Vec2 s = q1 - q0;
    const double denom = cross(r, s);
    if (std::abs(denom) > 1e-15) {
        const double t = cross(q0 - p0, s) / denom;
        const double u = cross(q0 - p0, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
            const Vec2 hit = p0 + r * t;
            return {hit, hit, 0.0};
        }
    }
    ClosestPoints best;
    best.distance = std::numeric_limits<double>::infinity();
    auto consider = [&best](const Vec2& a, const Vec2& b) {
        const double d = distance(a, b);
        if (d < best.distance)
            best = {a, b, d};
    };
    consider(p0, closest_point_on_segment(p0, q0, q1));
    consider(p1, closest_point_on_segment(p1, q0, q1));
    consider(closest_point_on_segment(q0, p0, p1), q0);
    consider(closest_point_on_segment(q1, p0, p1), q1);
    return best;
}

} // namespace biobot
