#include "biobot/records.hpp"

#include "biobot/kvfile.hpp"

#include <cstdio>
#include <sstream>

namespace biobot {

namespace {

std::string num(double v) { return format_double(v); }

void write_header(std::ostream& o, std::string_view format, const Provenance& prov,
                  const std::vector<std::pair<std::string, std::string>>& meta)
{
    o << "# biobot " << format << " v1\n";
    o << "# config_hash = " << hash_hex(prov.hash()) << '\n';
    o << "# seed = " << prov.seed << '\n';
    for (const auto& [k, v] : meta)
        o << "# " << k << " = " << v << '\n';
    std::istringstream cfg(prov.config_text);
    std::string line;
    while (std::getline(cfg, line))
        if (!line.empty())
            o << "# config: " << line << '\n';
}

void write_row(std::ostream& o, int t_ms, const TrialRow& r)
{
    o << t_ms << ',' << num(r.pose.position.x) << ',' << num(r.pose.position.y) << ',' << num(r.pose.heading_deg)
      << ',' << to_string(r.maneuver) << ',' << to_string(r.cmd) << ',' << to_string(r.phase) << ',' << num(r.D_cm)
      << ',' << num(r.gamma_deg) << ',' << to_string(r.side) << ',';
    if (r.speeds)
        o << num(r.speeds->omega_dps) << ',' << num(r.speeds->vl_cmps) << ',' << num(r.speeds->vf_cmps);
    else
        o << ",,";
    o << '\n';
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

/// Data lines after the column header; throws unless the header matches.
std::vector<std::vector<std::string>> data_rows(std::string_view text, std::string_view header, std::string_view source)
{
    std::istringstream in{std::string(text)};
    std::string line;
    bool seen_header = false;
    int lineno = 0;
    std::vector<std::vector<std::string>> rows;
    const std::size_t ncols = split_csv(std::string(header)).size();
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!seen_header) {
            if (line != header)
                throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": expected header '" +
                                  std::string(header) + "'");
            seen_header = true;
            continue;
        }
        auto cells = split_csv(line);
        if (cells.size() != ncols)
            throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(ncols) + " columns, found " + std::to_string(cells.size()));
        rows.push_back(std::move(cells));
    }
    if (!seen_header)
        throw FormatError(std::string(source) + ": missing column header");
    return rows;
}

std::string meta_or_throw(const LogHeader& h, const std::string& key, std::string_view source)
{
    const auto it = h.meta.find(key);
    if (it == h.meta.end())
        throw FormatError(std::string(source) + ": missing '# " + key + " = ...' line");
    return it->second;
}

} // namespace

LogHeader read_log_header(std::string_view text, std::string_view source)
{
    LogHeader h;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '#')
            break;
        std::string body = trim(std::string_view(line).substr(1));
        if (body.rfind("biobot ", 0) == 0 && h.format.empty()) {
            h.format = body.substr(7);
            continue;
        }
        if (body.rfind("config:", 0) == 0) {
            h.config_text += trim(std::string_view(body).substr(7)) + "\n";
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            continue;
        const std::string k = trim(std::string_view(body).substr(0, eq));
        const std::string v = trim(std::string_view(body).substr(eq + 1));
        if (k == "config_hash")
            h.config_hash = v;
        else if (k == "seed")
            h.seed = static_cast<std::uint64_t>(parse_int(v, "seed"));
        else
            h.meta[k] = v;
    }
    if (h.format.empty() || h.config_hash.empty())
        throw FormatError(std::string(source) + ": missing provenance header");
    return h;
}

std::string trajectory_csv(const TrialRecord& rec, const Provenance& prov)
{
    std::ostringstream o;
    write_header(o, "trajectory", prov,
                 {{"terrain", std::string(to_string(rec.terrain))},
                  {"algorithm", std::string(to_string(rec.controller))},
                  {"tick_ms", num(rec.tick_ms)},
                  {"outcome", std::string(to_string(rec.status.outcome))},
                  {"elapsed_s", num(rec.status.elapsed_s)}});
    o << kTrajectoryHeader << '\n';
    for (const auto& r : rec.rows)
        write_row(o, r.t_ms, r);
    return o.str();
}

TrialRecord read_trajectory_csv(std::string_view text, std::string_view source)
{
    const LogHeader h = read_log_header(text, source);
    TrialRecord rec;
    rec.seed = h.seed;
    rec.terrain = terrain_from_string(meta_or_throw(h, "terrain", source));
    rec.controller = controller_from_string(meta_or_throw(h, "algorithm", source));
    rec.tick_ms = parse_double(meta_or_throw(h, "tick_ms", source), "tick_ms");
    rec.status.outcome = outcome_from_string(meta_or_throw(h, "outcome", source));
    rec.status.elapsed_s = parse_double(meta_or_throw(h, "elapsed_s", source), "elapsed_s");
    rec.rows = read_trajectory_rows(text, source);
    return rec;
}

std::vector<TrialRow> read_trajectory_rows(std::string_view text, std::string_view source)
{
    std::vector<TrialRow> rows;
    for (const auto& c : data_rows(text, kTrajectoryHeader, source)) {
        TrialRow r;
        r.t_ms = static_cast<int>(parse_int(c[0], "t_ms"));
        r.pose = Pose{{parse_double(c[1], "x_cm"), parse_double(c[2], "y_cm")}, parse_double(c[3], "heading_deg")};
        r.maneuver = maneuver_from_string(c[4]);
        r.cmd = stimulus_from_string(c[5]);
        r.phase = phase_from_string(c[6]);
        r.D_cm = parse_double(c[7], "D_cm");
        r.gamma_deg = parse_double(c[8], "gamma_deg");
        try {
            r.side = side_from_string(c[9]);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string(source) + ": " + e.what());
        }
        if (!c[10].empty())
            r.speeds = SpeedEstimate{parse_double(c[10], "omega_dps"), parse_double(c[11], "vl_cmps"),
                                     parse_double(c[12], "vf_cmps"), r.t_ms / 1000.0};
        rows.push_back(r);
    }
    return rows;
}

std::string mission_trajectory_csv(const MissionRecord& rec, const Provenance& prov)
{
    std::ostringstream o;
    std::string legs;
    for (const auto& l : rec.legs)
        legs += (legs.empty() ? "" : " ") + std::string(to_string(l.record.status.outcome)) + "@" + num(l.t0_s);
    write_header(o, "mission-trajectory", prov,
                 {{"completed", rec.completed ? "true" : "false"}, {"duration_s", num(rec.duration_s)}, {"legs", legs}});
    o << kTrajectoryHeader << '\n';
    for (std::size_t i = 0; i < rec.legs.size(); ++i) {
        const auto& leg = rec.legs[i];
        const int t0 = static_cast<int>(std::lround(leg.t0_s * 1000.0));
        for (std::size_t k = (i == 0 ? 0 : 1); k < leg.record.rows.size(); ++k)
            write_row(o, t0 + leg.record.rows[k].t_ms, leg.record.rows[k]);
    }
    return o.str();
}

std::string detection_csv(const MissionRecord& rec, const Provenance& prov)
{
    std::ostringstream o;
    write_header(o, "detections", prov, {{"frames", std::to_string(rec.detections.size())}});
    o << kDetectionHeader << '\n';
    for (const auto& d : rec.detections)
        o << num(d.t_s) << ',' << (d.gate_active ? 1 : 0) << ',' << d.hot_count << ','
          << (d.score ? num(*d.score) : std::string()) << ',' << to_string(d.label) << '\n';
    return o.str();
}

std::vector<DetectionLogEntry> read_detection_csv(std::string_view text, std::string_view source)
{
    std::vector<DetectionLogEntry> out;
    for (const auto& c : data_rows(text, kDetectionHeader, source)) {
        DetectionLogEntry e;
        e.t_s = parse_double(c[0], "t_s");
        if (c[1] != "0" && c[1] != "1")
            throw FormatError(std::string(source) + ": gate_active must be 0 or 1");
        e.gate_active = c[1] == "1";
        e.hot_count = static_cast<int>(parse_int(c[2], "hot_count"));
        if (!c[3].empty())
            e.score = parse_double(c[3], "score");
        e.label = detection_label_from_string(c[4]);
        out.push_back(std::move(e));
    }
    return out;
}

std::string batch_csv(const std::vector<TrialRecord>& records, const Provenance& prov,
                      const std::vector<std::pair<std::string, std::string>>& meta)
{
    std::ostringstream o;
    auto all_meta = meta;
    all_meta.emplace_back("trials", std::to_string(records.size()));
    write_header(o, "batch", prov, all_meta);
    o << kBatchHeader << '\n';
    for (const auto& r : records) {
        std::size_t om = 0, vl = 0;
        for (const auto& e : r.metrics.accel_events)
            ++(e.trigger == AccelTrigger::Omega ? om : vl);
        o << r.seed << ',' << to_string(r.terrain) << ',' << to_string(r.controller) << ','
          << to_string(r.status.outcome) << ',' << num(r.status.elapsed_s) << ','
          << (r.metrics.navigation_time_s ? num(*r.metrics.navigation_time_s) : std::string()) << ','
          << num(r.metrics.backward_time_s) << ','
          << (r.metrics.first_climb_theta_deg ? num(*r.metrics.first_climb_theta_deg) : std::string()) << ','
          << to_string(r.metrics.climb_mode) << ',' << om << ',' << vl << '\n';
    }
    return o.str();
}

std::vector<TrialRecord> read_batch_csv(std::string_view text, std::string_view source)
{
    std::vector<TrialRecord> out;
    for (const auto& c : data_rows(text, kBatchHeader, source)) {
        TrialRecord r;
        r.seed = static_cast<std::uint64_t>(parse_int(c[0], "seed"));
        r.terrain = terrain_from_string(c[1]);
        r.controller = controller_from_string(c[2]);
        r.status.outcome = outcome_from_string(c[3]);
        r.status.elapsed_s = parse_double(c[4], "elapsed_s");
        if (!c[5].empty())
            r.metrics.navigation_time_s = parse_double(c[5], "navigation_time_s");
        r.metrics.backward_time_s = parse_double(c[6], "backward_time_s");
        if (!c[7].empty())
            r.metrics.first_climb_theta_deg = parse_double(c[7], "first_climb_theta_deg");
        if (c[8] == "orthogonal")
            r.metrics.climb_mode = ClimbMode::Orthogonal;
        else if (c[8] == "edge")
            r.metrics.climb_mode = ClimbMode::Edge;
        else if (c[8] != "none")
            throw FormatError(std::string(source) + ": unknown climb_mode '" + c[8] + "'");
        const auto om = parse_int(c[9], "accel_omega"), vl = parse_int(c[10], "accel_v_l");
        for (long long i = 0; i < om + vl; ++i)
            r.metrics.accel_events.push_back({0.0, {}, i < om ? AccelTrigger::Omega : AccelTrigger::LinearSpeed});
        out.push_back(std::move(r));
    }
    return out;
}

std::string batch_summary(const BatchStats& s, std::string_view title)
{
    auto ms = [](const MeanSd& m) {
        char buf[64];
        if (m.n == 0)
            return std::string("n/a");
        if (m.sd)
            std::snprintf(buf, sizeof buf, "%.2f +- %.2f (n=%zu)", m.mean, *m.sd, m.n);
        else
            std::snprintf(buf, sizeof buf, "%.2f (n=%zu, sd n/a)", m.mean, m.n);
        return std::string(buf);
    };
    std::ostringstream o;
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.1f%%", 100.0 * s.success_rate);
    o << title << '\n'
      << "  trials               " << s.n << '\n'
      << "  success              " << s.successes << " (" << rate << ")\n"
      << "  navigation time s    " << ms(s.navigation_time) << '\n'
      << "  backward time s      " << ms(s.backward_time) << '\n'
      << "  backward (timeouts)  " << ms(s.backward_time_timeouts) << '\n'
      << "  failures             immobile+stim " << s.immobile_stimulated << ", immobile " << s.immobile_unstimulated
      << ", timeout " << s.timeouts << '\n'
      << "  climb modes          orthogonal " << s.climb_orthogonal << ", edge " << s.climb_edge << ", none "
      << s.climb_none << '\n'
      << "  theta orthogonal deg " << ms(s.theta_orthogonal) << '\n'
      << "  theta edge deg       " << ms(s.theta_edge) << '\n'
      << "  accelerations        omega " << s.accel_omega << ", v_l " << s.accel_linear << '\n';
    return o.str();
}

} // namespace biobot
