#include "biobot/insect.hpp"

#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace biobot {

namespace {

constexpr std::string_view kManeuverNames[] = {"FreeWalk", "Turning", "Dashing", "WallFollow",
                                               "Climbing", "Backward", "Stopped"};
constexpr std::string_view kStimulusNames[] = {"None", "LeftCercus", "RightCercus", "Accelerate"};

struct ParamEntry {
    std::string_view name;
    double BehaviorParams::*member;
};

const std::vector<ParamEntry>& param_table()
{
    static const std::vector<ParamEntry> table = {
        {"body_length", &BehaviorParams::body_length},
        {"base_speed_mean", &BehaviorParams::base_speed_mean},
        {"base_speed_sd", &BehaviorParams::base_speed_sd},
        {"min_cruise_speed", &BehaviorParams::min_cruise_speed},
        {"speed_fluct_sd", &BehaviorParams::speed_fluct_sd},
        {"speed_fluct_tau", &BehaviorParams::speed_fluct_tau},
        {"heading_jitter", &BehaviorParams::heading_jitter},
        {"stim_turn_rate", &BehaviorParams::stim_turn_rate},
        {"turn_speed_factor", &BehaviorParams::turn_speed_factor},
        {"dash_gain", &BehaviorParams::dash_gain},
        {"dash_speed_floor", &BehaviorParams::dash_speed_floor},
        {"stop_hazard_free", &BehaviorParams::stop_hazard_free},
        {"stop_hazard_at_wall", &BehaviorParams::stop_hazard_at_wall},
        {"resume_hazard", &BehaviorParams::resume_hazard},
        {"resume_hazard_stim", &BehaviorParams::resume_hazard_stim},
        {"wall_proximity", &BehaviorParams::wall_proximity},
        {"wallfollow_bias", &BehaviorParams::wallfollow_bias},
        {"blocked_turn_factor", &BehaviorParams::blocked_turn_factor},
        {"block_reaction_mean", &BehaviorParams::block_reaction_mean},
        {"block_reaction_sd", &BehaviorParams::block_reaction_sd},
        {"backward_trigger_prob", &BehaviorParams::backward_trigger_prob},
        {"backward_speed_mean", &BehaviorParams::backward_speed_mean},
        {"backward_speed_sd", &BehaviorParams::backward_speed_sd},
        {"backward_duration_mean", &BehaviorParams::backward_duration_mean},
        {"backward_duration_sd", &BehaviorParams::backward_duration_sd},
        {"backward_turn_factor", &BehaviorParams::backward_turn_factor},
        {"wallfollow_persist", &BehaviorParams::wallfollow_persist},
        {"wall_hug_deg", &BehaviorParams::wall_hug_deg},
        {"wallfollow_turn_rate", &BehaviorParams::wallfollow_turn_rate},
        {"noclimb_prob", &BehaviorParams::noclimb_prob},
        {"contact_turn_sd", &BehaviorParams::contact_turn_sd},
        {"edge_follow_mean", &BehaviorParams::edge_follow_mean},
        {"edge_follow_sd", &BehaviorParams::edge_follow_sd},
        {"edge_climb_angle_mean", &BehaviorParams::edge_climb_angle_mean},
        {"edge_climb_angle_sd", &BehaviorParams::edge_climb_angle_sd},
        {"climb_speed", &BehaviorParams::climb_speed},
        {"climb_rear_time", &BehaviorParams::climb_rear_time},
        {"climb_clearance", &BehaviorParams::climb_clearance},
    };
    return table;
}

constexpr std::string_view kCurveKey = "climb_prob_vs_theta";

double sign_or(double v, double fallback) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : fallback); }

double heading_of(const Vec2& v) { return rad2deg(std::atan2(v.y, v.x)); }

const SegmentDecision* find_decision(const AgentState& s, std::size_t seg)
{
    for (const auto& d : s.decisions)
        if (d.segment == seg)
            return &d;
    return nullptr;
}

void erase_decision(AgentState& s, std::size_t seg)
{
    std::erase_if(s.decisions, [seg](const SegmentDecision& d) { return d.segment == seg; });
}

void enter(AgentState& s, Maneuver m)
{
    if (s.maneuver != m) {
        s.maneuver = m;
        s.time_in_maneuver = 0.0;
    }
}

void reset_block(AgentState& s)
{
    s.blocked_time = 0.0;
    s.block_reaction_delay = -1.0;
}

double turn_sign(const StimulusCommand& cmd)
{
    // Left cercus turns the insect clockwise, right cercus counterclockwise.
    return cmd.kind == Stimulus::RightCercus ? 1.0 : -1.0;
}

Vec2 wall_travel_dir(const AgentState& s, const Contact& c) { return c.tangent * static_cast<double>(s.wall_dir); }

int line_side(const ObstacleSegment& seg, const Vec2& p) { return cross(seg.b - seg.a, p - seg.a) >= 0.0 ? 1 : -1; }

// While climbing the insect is on top of the low structure: no low segment collides.
std::optional<Contact> body_contact(const Pose& pose, const Arena& arena, double body_length, bool climbing,
                                    double skin)
{
    auto best = boundary_contact(pose, body_length, arena, skin);
    const auto& obs = arena.obstacles();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (climbing && obs[i].climbable())
            continue;
        const auto c = segment_contact(pose, body_length, obs[i], i, skin);
        if (c && (!best || c->penetration > best->penetration))
            best = c;
    }
    return best;
}

bool touches_climbable(const Pose& pose, const Arena& arena, double body_length)
{
    const auto& obs = arena.obstacles();
    for (std::size_t i = 0; i < obs.size(); ++i)
        if (obs[i].climbable() && segment_contact(pose, body_length, obs[i], i, 0.0))
            return true;
    return false;
}

void resolve_penetration(Pose& pose, const Arena& arena, double body_length, bool climbing)
{
    for (int iter = 0; iter < 8; ++iter) {
        const auto c = body_contact(pose, arena, body_length, climbing, 0.0);
        if (!c || c->penetration <= 1e-12)
            return;
        pose.position += c->normal * (c->penetration + 1e-9);
    }
}

} // namespace

std::string_view to_string(Maneuver m) { return kManeuverNames[static_cast<int>(m)]; }
std::string_view to_string(Stimulus s) { return kStimulusNames[static_cast<int>(s)]; }

std::string_view to_string(ClimbOutcome c)
{
    switch (c) {
    case ClimbOutcome::ClimbOver: return "ClimbOver";
    case ClimbOutcome::EdgeFollowThenClimb: return "EdgeFollowThenClimb";
    case ClimbOutcome::NoClimb: return "NoClimb";
    }
    return "?";
}

Maneuver maneuver_from_string(std::string_view s)
{
    for (int i = 0; i < 7; ++i)
        if (kManeuverNames[i] == s)
            return static_cast<Maneuver>(i);
    throw FormatError("unknown maneuver '" + std::string(s) + "'");
}

Stimulus stimulus_from_string(std::string_view s)
{
    for (int i = 0; i < 4; ++i)
        if (kStimulusNames[i] == s)
            return static_cast<Stimulus>(i);
    throw FormatError("unknown stimulus '" + std::string(s) + "'");
}

double PiecewiseCurve::operator()(double x) const
{
    if (knots.empty())
        return 0.0;
    if (x <= knots.front().first)
        return knots.front().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const auto& [x1, y1] = knots[i];
        if (x <= x1) {
            const auto& [x0, y0] = knots[i - 1];
            return x1 > x0 ? y0 + (y1 - y0) * (x - x0) / (x1 - x0) : y1;
        }
    }
    return knots.back().second;
}

std::string PiecewiseCurve::to_text() const
{
    std::string out;
    for (const auto& [x, y] : knots) {
        if (!out.empty())
            out += ' ';
        out += format_double(x) + ':' + format_double(y);
    }
    return out;
}

PiecewiseCurve PiecewiseCurve::from_text(std::string_view text, std::string_view key)
{
    PiecewiseCurve curve;
    std::string buf(text);
    std::replace(buf.begin(), buf.end(), ',', ' ');
    std::istringstream in(buf);
    std::string tok;
    while (in >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw FormatError(std::string(key) + ": knot '" + tok + "' is not x:y");
        curve.knots.emplace_back(parse_double(tok.substr(0, colon), key), parse_double(tok.substr(colon + 1), key));
    }
    if (curve.knots.empty())
        throw FormatError(std::string(key) + ": no knots");
    for (std::size_t i = 1; i < curve.knots.size(); ++i)
        if (!(curve.knots[i].first > curve.knots[i - 1].first))
            throw FormatError(std::string(key) + ": knot x values must increase");
    return curve;
}

const std::vector<std::string_view>& behavior_param_names()
{
    static const std::vector<std::string_view> names = [] {
        std::vector<std::string_view> v;
        for (const auto& e : param_table())
            v.push_back(e.name);
        return v;
    }();
    return names;
}

double* behavior_param(BehaviorParams& p, std::string_view name)
{
    for (const auto& e : param_table())
        if (e.name == name)
            return &(p.*e.member);
    return nullptr;
}

const double* behavior_param(const BehaviorParams& p, std::string_view name)
{
    return behavior_param(const_cast<BehaviorParams&>(p), name);
}

void validate(const BehaviorParams& p)
{
    for (const auto& e : param_table())
        if (!std::isfinite(p.*e.member) || p.*e.member < 0.0)
            throw std::invalid_argument(std::string(e.name) + " must be finite and non-negative");
    auto require = [](bool ok, const char* what) {
        if (!ok)
            throw std::invalid_argument(what);
    };
    require(p.body_length > 0.0, "body_length must be positive");
    require(p.speed_fluct_tau > 0.0, "speed_fluct_tau must be positive");
    require(p.backward_trigger_prob <= 1.0, "backward_trigger_prob must be <= 1");
    require(p.noclimb_prob <= 1.0, "noclimb_prob must be <= 1");
    require(p.blocked_turn_factor <= 1.0, "blocked_turn_factor must be <= 1");
    require(p.climb_speed > 0.0, "climb_speed must be positive");
    require(!p.climb_prob_vs_theta.knots.empty(), "climb_prob_vs_theta needs knots");
    for (const auto& [x, y] : p.climb_prob_vs_theta.knots)
        require(y >= 0.0 && y <= 1.0, "climb_prob_vs_theta values must lie in [0, 1]");
}

std::string behavior_params_to_text(const BehaviorParams& p, std::string_view header)
{
    std::string out = "# biobot behavior v1\n";
    if (!header.empty()) {
        std::istringstream in{std::string(header)};
        for (std::string line; std::getline(in, line);)
            out += "# " + line + "\n";
    }
    for (const auto& e : param_table())
        out += std::string(e.name) + " = " + format_double(p.*e.member) + "\n";
    out += std::string(kCurveKey) + " = " + p.climb_prob_vs_theta.to_text() + "\n";
    return out;
}

BehaviorParams behavior_params_from_text(std::string_view text, std::string_view source)
{
    const KvDocument doc = parse_kv(text, source);
    BehaviorParams p;
    for (const auto& sec : doc.sections) {
        if (!sec.name.empty())
            throw FormatError(std::string(source) + ":" + std::to_string(sec.line) + ": unexpected section [" +
                              sec.name + "]");
        for (const auto& e : sec.entries) {
            if (e.key == kCurveKey) {
                p.climb_prob_vs_theta = PiecewiseCurve::from_text(e.value, e.key);
                continue;
            }
            double* slot = behavior_param(p, e.key);
            if (!slot)
                throw FormatError(std::string(source) + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                                  "'");
            *slot = parse_double(e.value, e.key);
        }
    }
    try {
        validate(p);
    } catch (const std::invalid_argument& ex) {
        throw FormatError(std::string(source) + ": " + ex.what());
    }
    return p;
}

BehaviorParams load_behavior_params(const std::string& path)
{
    return behavior_params_from_text(read_text_file(path), path);
}

std::optional<Contact> wall_contact(const Pose& pose, const Arena& arena, double body_length,
                                    std::optional<std::size_t> ignore, double skin)
{
    auto obstacle = contact_query(pose, body_length, arena, ignore, skin);
    auto boundary = boundary_contact(pose, body_length, arena, skin);
    if (!boundary)
        return obstacle;
    if (!obstacle)
        return boundary;
    return boundary->penetration > obstacle->penetration ? boundary : obstacle;
}

bool is_blocking(const Contact& c, const Arena& arena, const AgentState& state)
{
    if (c.boundary)
        return true;
    if (!arena.obstacles()[c.segment].climbable())
        return true;
    const auto* d = find_decision(state, c.segment);
    return d && d->outcome == ClimbOutcome::NoClimb;
}

AgentState spawn_agent(const Pose& pose, const BehaviorParams& params, Rng& rng)
{
    AgentState s;
    s.pose = pose;
    s.pose.heading_deg = wrap_deg(pose.heading_deg);
    s.cruise_speed = std::max(params.min_cruise_speed, gaussian(rng, params.base_speed_mean, params.base_speed_sd));
    s.speed = s.forward_speed = s.cruise_speed;
    return s;
}

ClimbOutcome climb_outcome(double theta_deg, const ObstacleSegment& segment, const BehaviorParams& params, Rng& rng)
{
    if (!segment.climbable())
        return ClimbOutcome::NoClimb;
    const double u = uniform01(rng);
    if (u < params.noclimb_prob)
        return ClimbOutcome::NoClimb;
    const double p_over = std::clamp(params.climb_prob_vs_theta(std::clamp(theta_deg, 0.0, 90.0)), 0.0, 1.0);
    const double v = (u - params.noclimb_prob) / std::max(1e-300, 1.0 - params.noclimb_prob);
    return v < p_over ? ClimbOutcome::ClimbOver : ClimbOutcome::EdgeFollowThenClimb;
}

AgentState wall_response(const AgentState& state, const std::optional<Contact>& contact, const StimulusCommand& cmd,
                         const Arena& arena, const BehaviorParams& params, double dt, Rng& rng)
{
    if (!contact)
        return state;
    AgentState s = state;
    const Maneuver m = s.maneuver;
    if (m != Maneuver::FreeWalk && m != Maneuver::Turning && m != Maneuver::Dashing && m != Maneuver::WallFollow)
        return s;

    const Contact& c = *contact;
    const Vec2 dir = s.pose.direction();
    const bool same_wall = s.wall_dir != 0 && s.wall_is_boundary == c.boundary &&
                           (c.boundary || s.wall_segment == std::optional<std::size_t>(c.segment));
    if (!same_wall) {
        s.wall_dir = static_cast<int>(sign_or(dot(dir, c.tangent), uniform01(rng) < 0.5 ? -1.0 : 1.0));
        s.wall_is_boundary = c.boundary;
        s.wall_segment = c.boundary ? std::nullopt : std::optional<std::size_t>(c.segment);
    }
    const double into = dot(dir, -c.normal);

    if (!c.boundary && arena.obstacles()[c.segment].climbable() && m != Maneuver::WallFollow) {
        const ObstacleSegment& seg = arena.obstacles()[c.segment];
        const auto* d = find_decision(s, c.segment);
        if (!d && into > 0.2) {
            s.pose.heading_deg = wrap_deg(s.pose.heading_deg + gaussian(rng, 0.0, params.contact_turn_sd));
            const ClimbOutcome outcome = climb_outcome(acute_angle_deg(s.pose.heading_deg, seg), seg, params, rng);
            s.decisions.push_back({c.segment, outcome});
            d = &s.decisions.back();
        }
        if (d && into > 0.2 && d->outcome == ClimbOutcome::ClimbOver) {
            enter(s, Maneuver::Climbing);
            s.climb_segment = c.segment;
            reset_block(s);
            return s;
        }
        if (d && d->outcome == ClimbOutcome::EdgeFollowThenClimb) {
            enter(s, Maneuver::WallFollow);
            s.edge_follow = true;
            s.maneuver_duration = lognormal_mean_sd(rng, params.edge_follow_mean, params.edge_follow_sd);
            reset_block(s);
            return s;
        }
    }
    if (!is_blocking(c, arena, s))
        return s;

    if (cmd.kind == Stimulus::Accelerate && m != Maneuver::WallFollow) {
        enter(s, Maneuver::WallFollow);
        s.edge_follow = false;
        s.wall_dir = static_cast<int>(sign_or(dot(dir, c.tangent), static_cast<double>(s.wall_dir)));
        s.maneuver_duration = params.wallfollow_persist;
        reset_block(s);
        return s;
    }
    if (cmd.steering() && (m == Maneuver::FreeWalk || m == Maneuver::Turning)) {
        const double rot_into = turn_sign(cmd) * dot(dir.perp(), -c.normal);
        if (rot_into > 0.0) {
            if (s.block_reaction_delay < 0.0)
                s.block_reaction_delay = lognormal_mean_sd(rng, params.block_reaction_mean, params.block_reaction_sd);
            s.blocked_time += dt;
            if (s.blocked_time >= s.block_reaction_delay) {
                if (uniform01(rng) < params.backward_trigger_prob) {
                    enter(s, Maneuver::Backward);
                    s.backward_speed = lognormal_mean_sd(rng, params.backward_speed_mean, params.backward_speed_sd);
                    s.maneuver_duration =
                        lognormal_mean_sd(rng, params.backward_duration_mean, params.backward_duration_sd);
                } else {
                    enter(s, Maneuver::Stopped);
                }
                reset_block(s);
            }
            return s;
        }
    }
    reset_block(s);
    return s;
}

AgentState advance(const AgentState& state, const StimulusCommand& cmd, const Arena& arena, double dt,
                   const BehaviorParams& params, Rng& rng)
{
    if (!(dt > 0.0 && dt <= 0.1))
        throw std::invalid_argument("advance: dt must lie in (0, 0.1] s");
    const double L = params.body_length;
    AgentState s = state;
    const bool accel = cmd.kind == Stimulus::Accelerate;

    s.speed_noise += -s.speed_noise / params.speed_fluct_tau * dt +
                     params.speed_fluct_sd * std::sqrt(2.0 * dt / params.speed_fluct_tau) * gaussian(rng);

    auto contact = body_contact(s.pose, arena, L, s.maneuver == Maneuver::Climbing,
                                std::max(kContactSkin, params.wall_proximity));
    if (!contact) {
        s.wall_dir = 0;
        s.wall_segment.reset();
        s.wall_is_boundary = false;
        reset_block(s);
    }

    switch (s.maneuver) {
    case Maneuver::Stopped:
        if (accel)
            enter(s, Maneuver::Dashing);
        else if (hazard_fires(rng, cmd.steering() ? params.resume_hazard_stim : params.resume_hazard, dt))
            enter(s, cmd.steering() ? Maneuver::Turning : Maneuver::FreeWalk);
        break;
    case Maneuver::Backward:
        if (accel)
            enter(s, Maneuver::Dashing);
        else if (s.time_in_maneuver >= s.maneuver_duration)
            enter(s, Maneuver::FreeWalk);
        break;
    case Maneuver::Climbing:
        break;
    case Maneuver::WallFollow: {
        const bool touching = contact && (s.edge_follow ? !contact->boundary && contact->segment == s.wall_segment
                                                        : is_blocking(*contact, arena, s));
        if (!touching) {
            if (s.edge_follow && s.wall_segment)
                erase_decision(s, *s.wall_segment);
            s.edge_follow = false;
            enter(s, accel ? Maneuver::Dashing : Maneuver::FreeWalk);
        } else if (s.edge_follow) {
            if (s.time_in_maneuver >= s.maneuver_duration) {
                const Vec2 along = wall_travel_dir(s, *contact);
                const double side = sign_or(cross(along, -contact->normal), 1.0);
                const double angle =
                    std::clamp(gaussian(rng, params.edge_climb_angle_mean, params.edge_climb_angle_sd), 10.0, 85.0);
                s.pose.heading_deg = wrap_deg(heading_of(along) + side * angle);
                s.climb_segment = contact->segment;
                s.edge_follow = false;
                enter(s, Maneuver::Climbing);
            }
        } else if (accel) {
            s.maneuver_duration = s.time_in_maneuver + params.wallfollow_persist;
        } else if (s.time_in_maneuver >= s.maneuver_duration) {
            enter(s, Maneuver::FreeWalk);
        }
        break;
    }
    case Maneuver::FreeWalk:
    case Maneuver::Turning:
    case Maneuver::Dashing: {
        enter(s, accel ? Maneuver::Dashing : (cmd.steering() ? Maneuver::Turning : Maneuver::FreeWalk));
        if (s.maneuver != Maneuver::Dashing) {
            const bool at_wall = contact && is_blocking(*contact, arena, s);
            const double rate =
                at_wall ? (cmd.steering() ? 0.0 : params.stop_hazard_at_wall) : params.stop_hazard_free;
            if (hazard_fires(rng, rate, dt))
                enter(s, Maneuver::Stopped);
        }
        break;
    }
    }

    if (s.maneuver != Maneuver::Stopped && s.maneuver != Maneuver::Climbing && s.maneuver != Maneuver::Backward)
        s = wall_response(s, contact, cmd, arena, params, dt, rng);

    // Heading.
    const Maneuver m = s.maneuver;
    double rot = 0.0;
    if (cmd.steering() && (m == Maneuver::FreeWalk || m == Maneuver::Turning || m == Maneuver::Backward))
        rot = turn_sign(cmd) * params.stim_turn_rate * dt * (m == Maneuver::Backward ? params.backward_turn_factor : 1.0);
    const bool pressed = contact && (m == Maneuver::FreeWalk || m == Maneuver::Turning) &&
                         is_blocking(*contact, arena, s) && s.wall_dir != 0;
    if (m == Maneuver::FreeWalk || m == Maneuver::Turning || m == Maneuver::Dashing || m == Maneuver::Backward)
        rot += gaussian(rng, 0.0, params.heading_jitter * std::sqrt(dt)) *
               (pressed ? params.blocked_turn_factor : 1.0);
    if (pressed) {
        const Vec2 dir = s.pose.direction();
        if (sign_or(rot, 0.0) * dot(dir.perp(), -contact->normal) > 0.0)
            rot *= params.blocked_turn_factor;
        const double ang = wrap_deg(heading_of(wall_travel_dir(s, *contact)) - s.pose.heading_deg);
        rot += sign_or(ang, 0.0) * std::min(params.wallfollow_bias * dt, std::abs(ang));
    }
    if (m == Maneuver::WallFollow && contact && s.wall_dir != 0) {
        const Vec2 along = wall_travel_dir(s, *contact);
        const double side = sign_or(cross(along, -contact->normal), 1.0);
        const double target = heading_of(along) + side * params.wall_hug_deg;
        const double ang = wrap_deg(target - s.pose.heading_deg);
        rot = sign_or(ang, 0.0) * std::min(params.wallfollow_turn_rate * dt, std::abs(ang));
    }
    s.pose.heading_deg = wrap_deg(s.pose.heading_deg + rot);
    const bool climbing = s.maneuver == Maneuver::Climbing;
    resolve_penetration(s.pose, arena, L, climbing);

    // Speed.
    const double cruise = std::max(0.2, s.cruise_speed + s.speed_noise);
    const double dash = std::max(cruise * params.dash_gain, params.dash_speed_floor);
    double v = 0.0;
    switch (m) {
    case Maneuver::FreeWalk: v = cruise; break;
    case Maneuver::Turning: v = cruise * params.turn_speed_factor; break;
    case Maneuver::Dashing: v = dash; break;
    case Maneuver::WallFollow: v = (accel && !s.edge_follow) ? dash : cruise; break;
    case Maneuver::Backward: v = -s.backward_speed; break;
    case Maneuver::Climbing: v = s.time_in_maneuver < params.climb_rear_time ? 0.0 : params.climb_speed; break;
    case Maneuver::Stopped: v = 0.0; break;
    }

    // Translation in short sub-steps so thin walls cannot be tunnelled.
    const double disp = v * dt;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(disp) / 0.05)));
    const Vec2 step = s.pose.direction() * (disp / n);
    for (int i = 0; i < n; ++i) {
        s.pose.position += step;
        resolve_penetration(s.pose, arena, L, climbing);
    }
    s.forward_speed = v;
    s.speed = std::abs(v);

    if (s.maneuver == Maneuver::Climbing && s.climb_segment) {
        const ObstacleSegment& seg = arena.obstacles()[*s.climb_segment];
        const double top = seg.height + params.climb_clearance;
        const double t = s.time_in_maneuver + dt;
        s.climb_height = params.climb_rear_time > 0.0 ? top * std::min(1.0, t / params.climb_rear_time) : top;
        if (s.climb_start_side == 0)
            s.climb_start_side = line_side(seg, s.pose.position - s.pose.direction() * (0.05 * L));
        const bool over = line_side(seg, s.pose.position) != s.climb_start_side && !touches_climbable(s.pose, arena, L);
        if ((t > params.climb_rear_time && over) || t > 30.0) {
            s.climb_start_side = 0;
            erase_decision(s, *s.climb_segment);
            s.climb_segment.reset();
            s.climb_height = 0.0;
            enter(s, Maneuver::FreeWalk);
            s.time_in_maneuver = -dt;
        }
    } else {
        s.climb_height = 0.0;
    }
    s.time_in_maneuver += dt;
    return s;
}

} // namespace biobot
