#pragma once
/**
 * @file sensing.hpp
 * @brief Virtual motion capture and virtual IMU.
 *
 * Both paths produce a SpeedEstimate; the navigation controller does not
 * know which one it is fed.
 */

#include "biobot/geometry.hpp"
#include "biobot/rng.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace biobot {

struct MarkerTriple {
    Vec2 anterior;
    Vec2 center;
    Vec2 third;
};

/// Third marker offset in the body frame (cm): behind the centre and to the left.
inline constexpr Vec2 kThirdMarkerOffset{-0.9, 0.6};

MarkerTriple markers_from_pose(const Pose& pose, double body_length);

/// Euclidean distance from the anterior marker to the destination.
double distance_to_target(const Vec2& anterior, const Vec2& dest);

enum class Side { Left, Right, Aligned };
std::string_view to_string(Side s);
Side side_from_string(std::string_view s);

struct OrientationError {
    double gamma_deg{0.0}; ///< unsigned, [0, 180]
    Side side{Side::Aligned};
};

/// Angle at the centre marker between body axis and the target. Throws std::invalid_argument if degenerate.
OrientationError orientation_error(const MarkerTriple& markers, const Vec2& dest);

struct SpeedEstimate {
    double omega_dps{0.0}; ///< signed yaw rate, CCW positive
    double vl_cmps{0.0};
    double vf_cmps{0.0};
    double timestamp_s{0.0};
    bool operator==(const SpeedEstimate&) const = default;
};

struct TrajectorySample {
    double t_s{0.0};
    Pose pose;
};

inline constexpr double kMocapWindowS = 0.25;

/// Moving-average finite differences over the trailing 250 ms of @p window.
/// Throws std::invalid_argument if the samples span less than that.
SpeedEstimate mocap_speeds(std::span<const TrajectorySample> window, double window_s = kMocapWindowS);

struct ImuNoise {
    double gyro_sd_dps{0.5};
    double gyro_bias_dps{0.1};
    double accel_sd_cmps2{2.0};
};

struct ImuTruth {
    double yaw_rate_dps{0.0};
    Vec2 accel_body; ///< cm/s^2, x forward, y left
};

struct ImuSample {
    double t_s{0.0};
    double yaw_rate_dps{0.0};
    Vec2 accel_body;
};

ImuSample imu_sample(double t_s, const ImuTruth& truth, const ImuNoise& noise, Rng& rng);

/// Ground-truth IMU signal from two consecutive poses/velocities.
ImuTruth imu_truth(const Pose& prev, const Vec2& prev_velocity, const Pose& curr, const Vec2& curr_velocity,
                   double dt);

inline constexpr double kImuCutoffHz = 10.0;
inline constexpr double kImuMinRateHz = 20.0;

/// First-order low-pass: y += a (x - y), a = 1 - exp(-2 pi fc dt).
double lowpass_alpha(double cutoff_hz, double dt);

/// Stateful IMU speed estimator; the caller threads it through the loop.
struct ImuEstimator {
    double cutoff_hz{kImuCutoffHz};
    double drift_gain{0.5};  ///< 1/s, pull of the integrated velocity toward the reference (or zero)
    double yaw_filtered{0.0};
    Vec2 accel_filtered;
    Vec2 velocity_body;
    std::optional<double> last_t;

    /// Consumes one sample. @p reference_velocity_body, when present, is a
    /// position-derived velocity used for drift correction.
    SpeedEstimate update(const ImuSample& s, std::optional<Vec2> reference_velocity_body = std::nullopt);
    SpeedEstimate estimate() const;
};

/// Runs a fresh estimator over @p samples. Throws std::invalid_argument if
/// fewer than two samples or any step is slower than 20 Hz.
SpeedEstimate imu_speeds(std::span<const ImuSample> samples, double cutoff_hz = kImuCutoffHz);

} // namespace biobot
