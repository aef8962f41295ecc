#include "biobot/harness.hpp"

#include "biobot/kvfile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <mutex>
#include <thread>
#include <tuple>

namespace biobot {

std::string_view to_string(AccelTrigger t) { return t == AccelTrigger::Omega ? "omega" : "v_l"; }

std::string_view to_string(ClimbMode m)
{
    switch (m) {
    case ClimbMode::None: return "none";
    case ClimbMode::Orthogonal: return "orthogonal";
    case ClimbMode::Edge: return "edge";
    }
    return "?";
}

TrialMetrics compute_metrics(const std::vector<TrialRow>& rows, const TrialStatus& status, const Arena& arena,
                             double tick_ms)
{
    TrialMetrics m;
    if (status.outcome == TrialOutcome::Success && !rows.empty())
        m.navigation_time_s = rows.back().t_ms / 1000.0;
    std::size_t backward = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TrialRow& r = rows[i];
        if (r.maneuver == Maneuver::Backward)
            ++backward;
        if (r.maneuver == Maneuver::Climbing && !m.first_climb_theta_deg) {
            if (const auto a = nearest_obstacle_angle(r.pose, arena))
                m.first_climb_theta_deg = a->theta_deg;
            m.climb_mode = (i > 0 && rows[i - 1].maneuver == Maneuver::WallFollow) ? ClimbMode::Edge
                                                                                    : ClimbMode::Orthogonal;
        }
        if (r.phase == Phase::Accelerating && i > 0 && rows[i - 1].phase != Phase::Accelerating) {
            m.accel_events.push_back({r.t_ms / 1000.0, r.pose.position,
                                      rows[i - 1].phase == Phase::PreAccelGrace ? AccelTrigger::Omega
                                                                                : AccelTrigger::LinearSpeed});
        }
    }
    m.backward_time_s = static_cast<double>(backward) * tick_ms / 1000.0;
    return m;
}

std::string_view to_string(SpeedSource s) { return s == SpeedSource::Mocap ? "mocap" : "imu"; }

namespace {

int whole_tick_ms(const NavParams& nav)
{
    const int tick_ms = static_cast<int>(std::lround(nav.tick_ms));
    if (std::abs(nav.tick_ms - tick_ms) > 1e-9)
        throw std::invalid_argument("tick must be a whole number of milliseconds");
    return tick_ms;
}

void validate_setup(const TrialSetup& setup)
{
    validate(setup.nav);
    validate(setup.behavior);
    if (setup.physics_substeps < 1)
        throw std::invalid_argument("physics_substeps must be >= 1");
    whole_tick_ms(setup.nav);
    if (setup.nav.tick_ms / 1000.0 / setup.physics_substeps > 0.1)
        throw std::invalid_argument("tick / physics_substeps must not exceed 100 ms");
}

} // namespace

TrialRecord run_leg(AgentState& agent, const Disc& target, const Arena& arena, ControllerKind controller,
                    const TrialSetup& setup, Rng& rng, const LegOptions& opts)
{
    validate_setup(setup);
    if (opts.speeds == SpeedSource::Imu && !opts.imu_rng)
        throw std::invalid_argument("run_leg: IMU speeds need an imu_rng");
    const NavParams& nav = setup.nav;
    const double L = setup.behavior.body_length;
    const int tick_ms = whole_tick_ms(nav);
    const double dt = nav.tick_ms / 1000.0 / setup.physics_substeps;
    const Vec2 dest = target.center;
    const double D_t = target.radius;

    TrialRecord rec;
    rec.terrain = arena.kind();
    rec.controller = controller;
    rec.tick_ms = nav.tick_ms;
    ControllerState ctrl;
    std::vector<TrajectorySample> traj;
    std::vector<StatusSample> hist;
    const int max_ticks = static_cast<int>(std::ceil(nav.trial_limit_s * 1000.0 / tick_ms)) + 2;
    const std::size_t window_samples = static_cast<std::size_t>(std::ceil(kMocapWindowS * 1000.0 / tick_ms)) + 2;
    bool last_active = false;
    ImuEstimator imu;
    Pose prev_pose = agent.pose;
    Vec2 prev_velocity;

    for (int k = 0; k <= max_ticks; ++k) {
        const int t_ms = k * tick_ms;
        const double t = t_ms / 1000.0;
        if (opts.observer)
            opts.observer(opts.t0_s + t, agent);
        const MarkerTriple mk = markers_from_pose(agent.pose, L);
        const double D = distance_to_target(mk.anterior, dest);
        const OrientationError oe = orientation_error(mk, dest);
        traj.push_back({t, agent.pose});
        hist.push_back({t, D, agent.pose.position, last_active});

        TrialRow row;
        row.t_ms = t_ms;
        row.pose = agent.pose;
        row.maneuver = agent.maneuver;
        row.D_cm = D;
        row.gamma_deg = oe.gamma_deg;
        row.side = oe.side;
        row.climb_height = agent.climb_height;
        if (opts.speeds == SpeedSource::Mocap) {
            if (t + 1e-9 >= kMocapWindowS) {
                const std::size_t from = traj.size() > window_samples ? traj.size() - window_samples : 0;
                row.speeds = mocap_speeds(std::span<const TrajectorySample>(traj).subspan(from));
            }
        } else {
            // Gyro/accelerometer sample per tick; tracked positions keep the integrated velocity from drifting.
            const double tick_s = tick_ms / 1000.0;
            const Vec2 velocity = k > 0 ? (agent.pose.position - prev_pose.position) / tick_s : Vec2{};
            const ImuTruth truth = k > 0 ? imu_truth(prev_pose, prev_velocity, agent.pose, velocity, tick_s) : ImuTruth{};
            const ImuSample sample = imu_sample(t, truth, opts.imu_noise, *opts.imu_rng);
            const SpeedEstimate e = imu.update(sample, rotate(velocity, -agent.pose.heading_deg));
            if (t + 1e-9 >= kMocapWindowS)
                row.speeds = e;
            prev_pose = agent.pose;
            prev_velocity = velocity;
        }

        const TrialStatus st = trial_status(hist, D_t, nav);
        if (st.outcome != TrialOutcome::Running) {
            row.phase = ctrl.phase;
            rec.rows.push_back(row);
            rec.status = st;
            break;
        }
        const Observation obs{t, D, oe.gamma_deg, oe.side};
        const TickOutput out = controller_tick(controller, ctrl, obs, row.speeds, D_t, nav);
        ctrl = out.next;
        row.cmd = out.cmd.kind;
        row.phase = ctrl.phase;
        row.omega_sampled = out.omega_sampled;
        row.vl_sampled = out.vl_sampled;
        rec.rows.push_back(row);
        last_active = out.cmd.active();

        for (int i = 0; i < setup.physics_substeps; ++i)
            agent = advance(agent, out.cmd, arena, dt, setup.behavior, rng);

        if (traj.size() > 4 * window_samples)
            traj.erase(traj.begin(), traj.end() - static_cast<std::ptrdiff_t>(window_samples));
        const std::size_t keep = static_cast<std::size_t>(std::ceil(nav.motionless_window_s * 1000.0 / tick_ms)) + 2;
        if (hist.size() > 4 * keep)
            hist.erase(hist.begin(), hist.end() - static_cast<std::ptrdiff_t>(keep));
    }
    rec.metrics = compute_metrics(rec.rows, rec.status, arena, nav.tick_ms);
    return rec;
}

TrialRecord run_trial(std::uint64_t seed, const Arena& arena, ControllerKind controller, const TrialSetup& setup)
{
    validate_setup(setup);
    Rng rng = make_rng(seed);
    const Vec2 start = arena.origin().center;
    const Vec2 dest = arena.destination().center;
    const double bearing = rad2deg(std::atan2(dest.y - start.y, dest.x - start.x));
    const double spread = setup.start_heading_spread_deg;
    Pose pose{start, wrap_deg(bearing + (2.0 * uniform01(rng) - 1.0) * spread)};
    AgentState agent = spawn_agent(pose, setup.behavior, rng);
    TrialRecord rec = run_leg(agent, arena.destination(), arena, controller, setup, rng);
    rec.seed = seed;
    return rec;
}

FailureContext classify_failure(const TrialRecord& record, const Arena& arena, const NavParams& nav)
{
    if (!is_failure(record.status.outcome) || record.rows.empty())
        throw std::invalid_argument("classify_failure: record did not fail");
    FailureContext c;
    c.reason = record.status.outcome;
    const TrialRow& last = record.rows.back();
    if (const auto a = nearest_obstacle_angle(last.pose, arena))
        c.theta_at_end_deg = a->theta_deg;
    const double from = last.t_ms / 1000.0 - nav.motionless_window_s;
    std::size_t n = 0, active = 0;
    for (auto it = record.rows.rbegin(); it != record.rows.rend() && it->t_ms / 1000.0 >= from - 1e-9; ++it) {
        if (&*it == &last)
            continue;
        ++n;
        active += it->cmd != Stimulus::None ? 1 : 0;
    }
    c.stimulated_fraction_final_window = n ? static_cast<double>(active) / n : 0.0;
    c.backward_time_s = record.metrics.backward_time_s;
    return c;
}

MeanSd mean_sd(const std::vector<double>& xs)
{
    MeanSd m;
    m.n = xs.size();
    if (xs.empty())
        return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / (xs.size() - 1));
    }
    return m;
}

BatchStats aggregate(const std::vector<TrialRecord>& records)
{
    // Sort by seed first so floating-point sums are order independent.
    std::vector<const TrialRecord*> sorted;
    for (const auto& r : records)
        sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
        return std::tie(a->seed, a->controller, a->terrain) < std::tie(b->seed, b->controller, b->terrain);
    });
    BatchStats s;
    s.n = records.size();
    std::vector<double> nav, back, back_to, th_o, th_e;
    for (const TrialRecord* r : sorted) {
        switch (r->status.outcome) {
        case TrialOutcome::Success: ++s.successes; break;
        case TrialOutcome::ImmobileStimulated: ++s.immobile_stimulated; break;
        case TrialOutcome::ImmobileUnstimulated: ++s.immobile_unstimulated; break;
        case TrialOutcome::Timeout:
            ++s.timeouts;
            back_to.push_back(r->metrics.backward_time_s);
            break;
        case TrialOutcome::Running: break;
        }
        if (r->metrics.navigation_time_s)
            nav.push_back(*r->metrics.navigation_time_s);
        back.push_back(r->metrics.backward_time_s);
        switch (r->metrics.climb_mode) {
        case ClimbMode::None: ++s.climb_none; break;
        case ClimbMode::Orthogonal:
            ++s.climb_orthogonal;
            th_o.push_back(*r->metrics.first_climb_theta_deg);
            break;
        case ClimbMode::Edge:
            ++s.climb_edge;
            th_e.push_back(*r->metrics.first_climb_theta_deg);
            break;
        }
        for (const auto& e : r->metrics.accel_events)
            ++(e.trigger == AccelTrigger::Omega ? s.accel_omega : s.accel_linear);
    }
    s.success_rate = s.n ? static_cast<double>(s.successes) / s.n : 0.0;
    s.navigation_time = mean_sd(nav);
    s.backward_time = mean_sd(back);
    s.backward_time_timeouts = mean_sd(back_to);
    s.theta_orthogonal = mean_sd(th_o);
    s.theta_edge = mean_sd(th_e);
    return s;
}

std::vector<TrialRecord> run_batch(const std::vector<std::uint64_t>& seeds, const Arena& arena,
                                   ControllerKind controller, const TrialSetup& setup, unsigned threads)
{
    if (seeds.empty())
        throw std::invalid_argument("run_batch: need at least one seed");
    std::vector<TrialRecord> out(seeds.size());
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
            try {
                out[i] = run_trial(seeds[i], arena, controller, setup);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t n)
{
    std::vector<std::uint64_t> s(n);
    std::iota(s.begin(), s.end(), first);
    return s;
}

std::optional<std::string> check_accel_provenance(const TrialRecord& record, const NavParams& nav)
{
    const auto& rows = record.rows;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].phase != Phase::Accelerating || rows[i - 1].phase == Phase::Accelerating)
            continue;
        const std::string at = "acceleration at t=" + std::to_string(rows[i].t_ms) + " ms";
        if (rows[i - 1].phase == Phase::PreAccelGrace) {
            std::size_t j = i - 1;
            while (j > 0 && rows[j].phase == Phase::PreAccelGrace && !rows[j].omega_sampled)
                --j;
            if (!rows[j].omega_sampled || !(std::abs(*rows[j].omega_sampled) < nav.omega_t_dps))
                return at + " lacks a below-threshold omega sample";
        } else if (!rows[i].vl_sampled || !(*rows[i].vl_sampled < nav.v_t_cmps)) {
            return at + " lacks a below-threshold v_l sample";
        }
    }
    return std::nullopt;
}

// Calibration ---------------------------------------------------------------

namespace {

constexpr std::pair<CalibStat, std::string_view> kStatNames[] = {
    {CalibStat::TallSimpleSuccess, "tall_simple_success"},
    {CalibStat::TallPredictiveSuccess, "tall_predictive_success"},
    {CalibStat::LowSimpleSuccess, "low_simple_success"},
    {CalibStat::LowPredictiveSuccess, "low_predictive_success"},
    {CalibStat::TallSimpleNavTime, "tall_simple_nav_time"},
    {CalibStat::TallPredictiveNavTime, "tall_predictive_nav_time"},
    {CalibStat::TallBackwardRatio, "tall_backward_ratio"},
    {CalibStat::TimeoutBackwardTime, "timeout_backward_time"},
    {CalibStat::OrthogonalTheta, "orthogonal_theta"},
    {CalibStat::EdgeTheta, "edge_theta"},
    {CalibStat::OrthogonalShare, "orthogonal_share"},
    {CalibStat::OpenPredictiveSuccess, "open_predictive_success"},
};

struct Needs {
    bool tall_simple{false}, tall_pred{false}, low_simple{false}, low_pred{false}, open_pred{false};
};

} // namespace

std::string_view to_string(CalibStat s)
{
    for (const auto& [k, n] : kStatNames)
        if (k == s)
            return n;
    return "?";
}

CalibStat calib_stat_from_string(std::string_view s)
{
    for (const auto& [k, n] : kStatNames)
        if (n == s)
            return k;
    throw FormatError("unknown calibration statistic '" + std::string(s) + "'");
}

std::vector<double> evaluate_stats(const std::vector<CalibStat>& stats, const TrialSetup& setup, int trials,
                                   std::uint64_t seed)
{
    Needs need;
    for (CalibStat s : stats) {
        switch (s) {
        case CalibStat::TallSimpleSuccess:
        case CalibStat::TallSimpleNavTime:
        case CalibStat::TimeoutBackwardTime: need.tall_simple = true; break;
        case CalibStat::TallPredictiveSuccess:
        case CalibStat::TallPredictiveNavTime: need.tall_pred = true; break;
        case CalibStat::TallBackwardRatio: need.tall_simple = need.tall_pred = true; break;
        case CalibStat::LowSimpleSuccess:
        case CalibStat::OrthogonalTheta:
        case CalibStat::EdgeTheta:
        case CalibStat::OrthogonalShare: need.low_simple = true; break;
        case CalibStat::LowPredictiveSuccess: need.low_pred = true; break;
        case CalibStat::OpenPredictiveSuccess: need.open_pred = true; break;
        }
    }
    const auto seeds = seed_range(seed, static_cast<std::size_t>(trials));
    auto batch = [&](bool needed, TerrainKind kind, ControllerKind c) {
        return needed ? aggregate(run_batch(seeds, build_terrain(kind), c, setup)) : BatchStats{};
    };
    const BatchStats ts = batch(need.tall_simple, TerrainKind::TallWall, ControllerKind::Simple);
    const BatchStats tp = batch(need.tall_pred, TerrainKind::TallWall, ControllerKind::Predictive);
    const BatchStats ls = batch(need.low_simple, TerrainKind::LowObstacle, ControllerKind::Simple);
    const BatchStats lp = batch(need.low_pred, TerrainKind::LowObstacle, ControllerKind::Predictive);
    const BatchStats op = batch(need.open_pred, TerrainKind::NoObstacle, ControllerKind::Predictive);

    std::vector<double> out;
    for (CalibStat s : stats) {
        double v = 0.0;
        switch (s) {
        case CalibStat::TallSimpleSuccess: v = ts.success_rate; break;
        case CalibStat::TallPredictiveSuccess: v = tp.success_rate; break;
        case CalibStat::LowSimpleSuccess: v = ls.success_rate; break;
        case CalibStat::LowPredictiveSuccess: v = lp.success_rate; break;
        case CalibStat::TallSimpleNavTime: v = ts.navigation_time.n ? ts.navigation_time.mean : 100.0; break;
        case CalibStat::TallPredictiveNavTime: v = tp.navigation_time.n ? tp.navigation_time.mean : 100.0; break;
        case CalibStat::TallBackwardRatio:
            v = ts.backward_time.mean / std::max(tp.backward_time.mean, 1e-3);
            break;
        case CalibStat::TimeoutBackwardTime: v = ts.backward_time_timeouts.mean; break;
        case CalibStat::OrthogonalTheta: v = ls.theta_orthogonal.mean; break;
        case CalibStat::EdgeTheta: v = ls.theta_edge.mean; break;
        case CalibStat::OrthogonalShare: {
            const double climbs = static_cast<double>(ls.climb_orthogonal + ls.climb_edge);
            v = climbs > 0 ? ls.climb_orthogonal / climbs : 0.0;
            break;
        }
        case CalibStat::OpenPredictiveSuccess: v = op.success_rate; break;
        }
        out.push_back(v);
    }
    return out;
}

std::vector<CalibTarget> default_calibration_targets()
{
    return {
        {CalibStat::TallSimpleSuccess, 0.245, 0.10, true},
        {CalibStat::TallPredictiveSuccess, 0.94, 0.06, true},
        {CalibStat::LowSimpleSuccess, 0.98, 0.03, true},
        {CalibStat::LowPredictiveSuccess, 1.0, 0.03, true},
        {CalibStat::OrthogonalTheta, 74.89, 5.0, true},
        {CalibStat::EdgeTheta, 38.77, 5.0, true},
        {CalibStat::OrthogonalShare, 35.0 / 47.0, 0.12, true},
        {CalibStat::TallBackwardRatio, 8.0, 4.0, false},
        {CalibStat::TallSimpleNavTime, 48.98, 10.0, false},
        {CalibStat::TallPredictiveNavTime, 33.91, 10.0, false},
        {CalibStat::TimeoutBackwardTime, 40.93, 13.34, false},
    };
}

namespace {

struct Scored {
    double misfit{0.0};
    bool mandatory_met{true};
    std::vector<double> values;
};

Scored score(const std::vector<CalibTarget>& targets, const TrialSetup& setup, const CalibSearch& search)
{
    std::vector<CalibStat> stats;
    for (const auto& t : targets)
        stats.push_back(t.stat);
    Scored s;
    s.values = evaluate_stats(stats, setup, search.trials_per_eval, search.seed);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double z = (s.values[i] - targets[i].value) / targets[i].tolerance;
        s.misfit += (targets[i].mandatory ? 1.0 : 0.25) * z * z;
        if (targets[i].mandatory && std::abs(z) > 1.0)
            s.mandatory_met = false;
    }
    return s;
}

} // namespace

CalibResult calibrate(const std::vector<CalibTarget>& targets, const CalibSearch& search, const TrialSetup& start)
{
    CalibResult res;
    res.params = start.behavior;
    if (targets.empty())
        return res;
    if (search.params.size() != search.bounds.size())
        throw std::invalid_argument("calibrate: one bound pair per parameter is required");
    for (const auto& name : search.params)
        if (!behavior_param(res.params, name))
            throw std::invalid_argument("calibrate: unknown parameter '" + name + "'");

    TrialSetup setup = start;
    Scored best = score(targets, setup, search);
    res.evaluations = 1;
    Rng rng = make_rng(search.seed, 0xca1b);
    auto try_params = [&](const BehaviorParams& p) {
        TrialSetup cand = setup;
        cand.behavior = p;
        try {
            validate(p);
        } catch (const std::invalid_argument&) {
            return false;
        }
        Scored s = score(targets, cand, search);
        ++res.evaluations;
        if (s.misfit < best.misfit) {
            best = std::move(s);
            setup = cand;
            return true;
        }
        return false;
    };
    for (int i = 0; i < search.random_samples; ++i) {
        BehaviorParams p = setup.behavior;
        for (std::size_t k = 0; k < search.params.size(); ++k) {
            const auto [lo, hi] = search.bounds[k];
            *behavior_param(p, search.params[k]) = lo + (hi - lo) * uniform01(rng);
        }
        try_params(p);
    }
    double step = 0.25;
    for (int round = 0; round < search.descent_rounds; ++round, step *= 0.5) {
        for (std::size_t k = 0; k < search.params.size(); ++k) {
            const auto [lo, hi] = search.bounds[k];
            for (double dir : {1.0, -1.0}) {
                BehaviorParams p = setup.behavior;
                double& v = *behavior_param(p, search.params[k]);
                v = std::clamp(v + dir * step * (hi - lo), lo, hi);
                if (try_params(p))
                    break;
            }
        }
    }
    res.params = setup.behavior;
    res.misfit = best.misfit;
    res.mandatory_met = best.mandatory_met;
    for (std::size_t i = 0; i < targets.size(); ++i)
        res.achieved.emplace_back(targets[i], best.values[i]);
    return res;
}

// Power ---------------------------------------------------------------------

PowerBudget power_budget(const std::vector<PowerComponent>& components, const Battery& battery)
{
    PowerBudget b;
    b.components = components;
    b.battery = battery;
    if (!(battery.capacity_mah > 0.0) || !(battery.voltage_v > 0.0))
        throw std::invalid_argument("power budget: battery capacity and voltage must be positive");
    for (const auto& c : components) {
        if (c.active_mw < 0.0 || c.sleep_mw < 0.0 || c.duty < 0.0 || c.duty > 1.0)
            throw std::invalid_argument("power component '" + c.name + "' has a negative draw or duty outside [0, 1]");
        b.total_mw += c.average_mw();
    }
    if (!(b.total_mw > 0.0))
        throw std::invalid_argument("power budget: total draw is zero");
    // mAh * V = mWh; mWh / mW = h.
    b.endurance_h = battery.capacity_mah * battery.voltage_v / b.total_mw;
    return b;
}

std::vector<PowerComponent> default_power_components()
{
    return {
        {"imu", 11.55, 1.0, 0.0},
        {"thermal_camera", 21.45, 1.0, 0.008},
        {"human_detection", 24.0, 1.0, 0.0},
        {"mcu_radio_stimulator", 148.5, 1.0, 0.0},
    };
}

} // namespace biobot
