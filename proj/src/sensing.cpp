#include "biobot/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace biobot {

MarkerTriple markers_from_pose(const Pose& pose, double body_length)
{
    if (!(body_length > 0.0))
        throw std::invalid_argument("markers_from_pose: body_length must be positive");
    const Vec2 d = pose.direction();
    const Vec2 left = d.perp();
    return {pose.position + d * (0.5 * body_length), pose.position,
            pose.position + d * kThirdMarkerOffset.x + left * kThirdMarkerOffset.y};
}

double distance_to_target(const Vec2& anterior, const Vec2& dest) { return distance(anterior, dest); }

std::string_view to_string(Side s)
{
    switch (s) {
    case Side::Left: return "Left";
    case Side::Right: return "Right";
    case Side::Aligned: return "Aligned";
    }
    return "?";
}

Side side_from_string(std::string_view s)
{
    for (auto v : {Side::Left, Side::Right, Side::Aligned})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument("unknown side '" + std::string(s) + "'");
}

OrientationError orientation_error(const MarkerTriple& markers, const Vec2& dest)
{
    const Vec2 body = markers.anterior - markers.center;
    const Vec2 target = dest - markers.center;
    const double nb = body.norm();
    const double nt = target.norm();
    if (!(nb > 0.0) || !(nt > 0.0))
        throw std::invalid_argument("orientation_error: degenerate body or target vector");
    const double c = cross(body, target);
    // Same angle as acos(dot / (|b||t|)), without its loss of precision near 0 and 180.
    OrientationError out;
    out.gamma_deg = rad2deg(std::atan2(std::abs(c), dot(body, target)));
    const double s = c / (nb * nt);
    out.side = std::abs(s) < 1e-12 ? Side::Aligned : (s > 0.0 ? Side::Left : Side::Right);
    return out;
}

SpeedEstimate mocap_speeds(std::span<const TrajectorySample> window, double window_s)
{
    if (window.size() < 2)
        throw std::invalid_argument("mocap_speeds: need at least two samples");
    const TrajectorySample& last = window.back();
    const double t0 = last.t_s - window_s + 1e-9;
    std::size_t first = window.size();
    for (std::size_t i = window.size(); i-- > 0;)
        if (window[i].t_s <= t0) {
            first = i;
            break;
        }
    if (first == window.size())
        throw std::invalid_argument("mocap_speeds: samples span less than the averaging window");
    const TrajectorySample& start = window[first];
    const double T = last.t_s - start.t_s;
    // Sum of per-sample heading increments, so turns past +-180 deg are not folded.
    double turned = 0.0;
    for (std::size_t i = first + 1; i < window.size(); ++i)
        turned += wrap_deg(window[i].pose.heading_deg - window[i - 1].pose.heading_deg);
    const Vec2 v = (last.pose.position - start.pose.position) / T;
    const Vec2 mean_dir = unit_from_deg(start.pose.heading_deg + 0.5 * turned);
    SpeedEstimate e;
    e.omega_dps = turned / T;
    e.vl_cmps = v.norm();
    e.vf_cmps = dot(v, mean_dir);
    e.timestamp_s = last.t_s;
    return e;
}

ImuSample imu_sample(double t_s, const ImuTruth& truth, const ImuNoise& noise, Rng& rng)
{
    ImuSample s;
    s.t_s = t_s;
    s.yaw_rate_dps = truth.yaw_rate_dps + noise.gyro_bias_dps + gaussian(rng, 0.0, noise.gyro_sd_dps);
    s.accel_body = {truth.accel_body.x + gaussian(rng, 0.0, noise.accel_sd_cmps2),
                    truth.accel_body.y + gaussian(rng, 0.0, noise.accel_sd_cmps2)};
    return s;
}

ImuTruth imu_truth(const Pose& prev, const Vec2& prev_velocity, const Pose& curr, const Vec2& curr_velocity,
                   double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("imu_truth: dt must be positive");
    ImuTruth t;
    t.yaw_rate_dps = wrap_deg(curr.heading_deg - prev.heading_deg) / dt;
    const Vec2 a_world = (curr_velocity - prev_velocity) / dt;
    t.accel_body = rotate(a_world, -curr.heading_deg);
    return t;
}

double lowpass_alpha(double cutoff_hz, double dt) { return -std::expm1(-2.0 * kPi * cutoff_hz * dt); }

SpeedEstimate ImuEstimator::update(const ImuSample& s, std::optional<Vec2> reference_velocity_body)
{
    if (!last_t) {
        yaw_filtered = s.yaw_rate_dps;
        accel_filtered = s.accel_body;
        last_t = s.t_s;
        if (reference_velocity_body)
            velocity_body = *reference_velocity_body;
        return estimate();
    }
    const double dt = s.t_s - *last_t;
    if (!(dt > 0.0) || dt > 1.0 / kImuMinRateHz + 1e-9)
        throw std::invalid_argument("imu: sample cadence below 20 Hz or non-increasing timestamps");
    const double a = lowpass_alpha(cutoff_hz, dt);
    yaw_filtered += a * (s.yaw_rate_dps - yaw_filtered);
    accel_filtered += (s.accel_body - accel_filtered) * a;
    // Body-frame kinematics: v' = a - r J v.
    const double r = deg2rad(yaw_filtered);
    velocity_body += (accel_filtered - velocity_body.perp() * r) * dt;
    const Vec2 ref = reference_velocity_body.value_or(Vec2{});
    velocity_body += (ref - velocity_body) * (-std::expm1(-drift_gain * dt));
    last_t = s.t_s;
    return estimate();
}

SpeedEstimate ImuEstimator::estimate() const
{
    SpeedEstimate e;
    e.omega_dps = yaw_filtered;
    e.vl_cmps = velocity_body.norm();
    e.vf_cmps = velocity_body.x;
    e.timestamp_s = last_t.value_or(0.0);
    return e;
}

SpeedEstimate imu_speeds(std::span<const ImuSample> samples, double cutoff_hz)
{
    if (samples.size() < 2)
        throw std::invalid_argument("imu_speeds: need at least two samples");
    ImuEstimator est;
    est.cutoff_hz = cutoff_hz;
    SpeedEstimate e;
    for (const auto& s : samples)
        e = est.update(s);
    return e;
}

} // namespace biobot
