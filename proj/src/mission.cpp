#include "biobot/mission.hpp"

#include "biobot/kvfile.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace biobot {

namespace {

constexpr std::uint64_t kImuStream = 1;
constexpr std::uint64_t kFrameStream = 2;
constexpr std::uint64_t kSubjectStreamBase = 100;

Vec2 read_pair(const KvSection& s, std::string_view key)
{
    const auto v = s.get_doubles(key);
    if (v.size() != 2)
        throw FormatError("key '" + std::string(key) + "': expected two numbers");
    return {v[0], v[1]};
}

struct Placement {
    double distance_m{0.0};
    double bearing_deg{0.0};
    double rotation_deg{0.0};
};

std::optional<Placement> place(const MissionScenario& sc, const MissionSubject& s, const Pose& camera)
{
    const Vec2 rel = s.position - camera.position;
    const double bearing = wrap_deg(rad2deg(std::atan2(rel.y, rel.x)) - camera.heading_deg);
    if (std::abs(bearing) >= 89.0)
        return std::nullopt;
    Placement p;
    p.distance_m = std::max(rel.norm() / 100.0, sc.min_range_m);
    p.bearing_deg = bearing;
    p.rotation_deg = wrap_deg(s.facing_deg - rad2deg(std::atan2(-rel.y, -rel.x)));
    return p;
}

ThermalSubject posed(const MissionScenario& sc, std::size_t i, const Placement& p)
{
    // A fresh stream per subject keeps its surface temperatures and posture fixed across frames.
    Rng looks = make_rng(sc.seed, kSubjectStreamBase + i);
    ThermalSubject subj = make_subject(find_subject(sc.subjects[i].template_id), p.rotation_deg, p.distance_m, looks);
    subj.id = sc.subjects[i].name;
    subj.bearing_deg = p.bearing_deg;
    return subj;
}

Pose camera_pose(const AgentState& agent, double body_length)
{
    return Pose{markers_from_pose(agent.pose, body_length).anterior, agent.pose.heading_deg};
}

} // namespace

MissionScenario scenario_from_text(std::string_view text, std::string_view source)
{
    const KvDocument doc = parse_kv(text, source);
    MissionScenario sc;
    sc.arena = arena_from_kv(doc, source, {"mission", "subject"});
    if (sc.arena.targets().empty())
        throw FormatError(std::string(source) + ": a mission needs at least one [target]");
    if (doc.all("mission").size() > 1)
        throw FormatError(std::string(source) + ": more than one [mission] section");
    if (const KvSection* m = doc.first("mission")) {
        m->require_known({"name", "seed", "ambient_c", "ambient_sd", "noise_sd", "salt_pepper", "camera_height_cm",
                          "frame_period_s", "leg_limit_s", "flag_range_m", "min_range_m"});
        if (m->has("name"))
            sc.name = trim(m->get("name"));
        if (m->has("seed"))
            sc.seed = static_cast<std::uint64_t>(parse_int(m->get("seed"), "seed"));
        sc.ambient_c = m->get_double("ambient_c", sc.ambient_c);
        sc.ambient_sd = m->get_double("ambient_sd", sc.ambient_sd);
        sc.noise_sd = m->get_double("noise_sd", sc.noise_sd);
        sc.salt_pepper = m->get_double("salt_pepper", sc.salt_pepper);
        sc.camera_height_cm = m->get_double("camera_height_cm", sc.camera_height_cm);
        sc.frame_period_s = m->get_double("frame_period_s", sc.frame_period_s);
        sc.leg_limit_s = m->get_double("leg_limit_s", sc.leg_limit_s);
        sc.flag_range_m = m->get_double("flag_range_m", sc.flag_range_m);
        sc.min_range_m = m->get_double("min_range_m", sc.min_range_m);
    }
    if (!(sc.frame_period_s > 0.0) || !(sc.leg_limit_s > 0.0) || !(sc.min_range_m > 0.0))
        throw FormatError(std::string(source) + ": frame_period_s, leg_limit_s and min_range_m must be positive");
    for (const KvSection* s : doc.all("subject")) {
        s->require_known({"name", "template", "position", "facing_deg"});
        MissionSubject ms;
        ms.template_id = trim(s->get("template"));
        ms.name = s->has("name") ? trim(s->get("name")) : ms.template_id;
        ms.position = read_pair(*s, "position");
        ms.facing_deg = s->get_double("facing_deg", 0.0);
        try {
            find_subject(ms.template_id);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string(source) + ":" + std::to_string(s->line) + ": " + e.what());
        }
        for (const auto& other : sc.subjects)
            if (other.name == ms.name)
                throw FormatError(std::string(source) + ": duplicate subject name '" + ms.name + "'");
        sc.subjects.push_back(std::move(ms));
    }
    return sc;
}

MissionScenario load_scenario(const std::string& path) { return scenario_from_text(read_text_file(path), path); }

std::string scenario_to_text(const MissionScenario& s)
{
    std::ostringstream o;
    o << "# biobot mission scenario v1\n[mission]\nname = " << s.name << "\nseed = " << s.seed
      << "\nambient_c = " << format_double(s.ambient_c) << "\nambient_sd = " << format_double(s.ambient_sd)
      << "\nnoise_sd = " << format_double(s.noise_sd) << "\nsalt_pepper = " << format_double(s.salt_pepper)
      << "\ncamera_height_cm = " << format_double(s.camera_height_cm)
      << "\nframe_period_s = " << format_double(s.frame_period_s)
      << "\nleg_limit_s = " << format_double(s.leg_limit_s) << "\nflag_range_m = " << format_double(s.flag_range_m)
      << "\nmin_range_m = " << format_double(s.min_range_m) << "\n\n";
    std::string arena = arena_to_text(s.arena);
    if (arena.rfind("# biobot arena v1\n", 0) == 0)
        arena.erase(0, 18);
    o << arena;
    for (const auto& m : s.subjects)
        o << "[subject]\nname = " << m.name << "\ntemplate = " << m.template_id << "\nposition = "
          << format_double(m.position.x) << ' ' << format_double(m.position.y)
          << "\nfacing_deg = " << format_double(m.facing_deg) << "\n\n";
    return o.str();
}

std::vector<VisibleSubject> visible_subjects(const MissionScenario& scenario, const Pose& camera)
{
    std::vector<VisibleSubject> out;
    Rng unused = make_rng(0);
    for (std::size_t i = 0; i < scenario.subjects.size(); ++i) {
        const auto p = place(scenario, scenario.subjects[i], camera);
        if (!p)
            continue;
        SceneSpec probe;
        probe.ambient_c = 0.0;
        probe.camera_height_cm = scenario.camera_height_cm;
        probe.subjects.push_back(posed(scenario, i, *p));
        const ThermalImage img = render_frame(probe, unused);
        bool any = false;
        for (double v : img.px)
            any = any || v != 0.0;
        if (any)
            out.push_back({scenario.subjects[i].name, probe.subjects[0].kind == SubjectKind::Human, p->distance_m,
                           p->bearing_deg});
    }
    return out;
}

ThermalImage mission_frame(const MissionScenario& scenario, const Pose& camera, double t_s, Rng& rng)
{
    SceneSpec scene;
    scene.ambient_c = scenario.ambient_c;
    scene.ambient_sd = scenario.ambient_sd;
    scene.noise_sd = scenario.noise_sd;
    scene.salt_pepper = scenario.salt_pepper;
    scene.camera_height_cm = scenario.camera_height_cm;
    scene.timestamp_s = t_s;
    for (std::size_t i = 0; i < scenario.subjects.size(); ++i)
        if (const auto p = place(scenario, scenario.subjects[i], camera))
            scene.subjects.push_back(posed(scenario, i, *p));
    return render_frame(scene, rng);
}

MissionRecord run_mission(const MissionScenario& scenario, const SvmModel& model, const TrialSetup& setup)
{
    const Arena& arena = scenario.arena;
    if (arena.targets().empty())
        throw std::invalid_argument("run_mission: arena has no targets");
    TrialSetup leg_setup = setup;
    leg_setup.nav.trial_limit_s = scenario.leg_limit_s;
    const double L = setup.behavior.body_length;

    MissionRecord rec;
    rec.seed = scenario.seed;
    Rng rng = make_rng(scenario.seed);
    Rng imu_rng = make_rng(scenario.seed, kImuStream);
    Rng frame_rng = make_rng(scenario.seed, kFrameStream);

    const Vec2 start = arena.origin().center;
    const Vec2 first = arena.targets().front().center;
    const double bearing = rad2deg(std::atan2(first.y - start.y, first.x - start.x));
    const Pose pose{start, wrap_deg(bearing + (2.0 * uniform01(rng) - 1.0) * setup.start_heading_spread_deg)};
    AgentState agent = spawn_agent(pose, setup.behavior, rng);

    double next_frame = 0.0;
    LegOptions opts;
    opts.speeds = SpeedSource::Imu;
    opts.imu_rng = &imu_rng;
    opts.observer = [&](double t, const AgentState& a) {
        if (t + 1e-9 < next_frame)
            return;
        next_frame += scenario.frame_period_s;
        const Pose cam = camera_pose(a, L);
        const ThermalImage img = mission_frame(scenario, cam, t, frame_rng);
        const DetectionResult d = detect(img, model);
        rec.detections.push_back({t, a.pose, d.gate_active, d.hot_pixel_count, d.score, d.label,
                                  visible_subjects(scenario, cam)});
    };

    std::vector<std::pair<Disc, bool>> plan;
    for (const auto& t : arena.targets())
        plan.emplace_back(t, false);
    plan.emplace_back(arena.origin(), true);

    double clock = 0.0;
    rec.completed = true;
    for (const auto& [target, back] : plan) {
        opts.t0_s = clock;
        MissionLeg leg{target, back, clock,
                       run_leg(agent, target, arena, ControllerKind::Predictive, leg_setup, rng, opts)};
        leg.record.seed = scenario.seed;
        clock += leg.record.rows.back().t_ms / 1000.0;
        for (const auto& e : leg.record.metrics.accel_events)
            ++(e.trigger == AccelTrigger::Omega ? rec.accel_omega : rec.accel_linear);
        const bool ok = leg.record.status.outcome == TrialOutcome::Success;
        rec.legs.push_back(std::move(leg));
        if (!ok) {
            rec.completed = false;
            break;
        }
    }
    rec.duration_s = clock;
    return rec;
}

MissionReport mission_report(const MissionRecord& record, const MissionScenario& scenario, const NavParams& nav)
{
    MissionReport r;
    r.waypoints = scenario.arena.targets().size();
    for (const auto& leg : record.legs) {
        const bool ok = leg.record.status.outcome == TrialOutcome::Success;
        if (leg.return_leg)
            r.returned = ok;
        else if (ok)
            ++r.waypoints_reached;
        if (!r.provenance_violation)
            if (auto v = check_accel_provenance(leg.record, nav))
                r.provenance_violation = "leg at t=" + format_double(leg.t0_s) + " s: " + *v;
    }
    r.accel_omega = record.accel_omega;
    r.accel_linear = record.accel_linear;
    for (const auto& s : scenario.subjects)
        if (find_subject(s.template_id).kind == SubjectKind::Human)
            r.humans.push_back({s.name, false, std::nullopt, 0});

    for (const auto& f : record.detections) {
        ++r.frames;
        r.gate_activations += f.gate_active ? 1 : 0;
        const bool human_label = f.label == DetectionLabel::Human;
        r.human_labels += human_label ? 1 : 0;
        bool human_seen = false, object_seen = false;
        for (const auto& v : f.visible) {
            (v.human ? human_seen : object_seen) = true;
            if (!v.human)
                continue;
            for (auto& h : r.humans) {
                if (h.name != v.name)
                    continue;
                h.closest_m = h.closest_m ? std::min(*h.closest_m, v.distance_m) : v.distance_m;
                if (human_label && v.distance_m <= scenario.flag_range_m) {
                    h.flagged = true;
                    ++h.flagged_frames;
                }
            }
        }
        if (object_seen && !human_seen) {
            ++r.hot_only_frames;
            r.hot_only_human_labels += human_label ? 1 : 0;
        }
    }
    return r;
}

bool mission_passed(const MissionReport& r)
{
    bool humans = true;
    for (const auto& h : r.humans)
        humans = humans && h.flagged;
    return r.waypoints_reached == r.waypoints && r.returned && humans && r.hot_only_human_labels == 0 &&
           !r.provenance_violation;
}

} // namespace biobot
