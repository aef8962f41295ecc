#include "biobot/plot.hpp"

#include "biobot/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace biobot {

namespace {

std::string f2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string_view colour(std::string_view cls)
{
    if (cls == "steer-left")
        return "#2ca02c";
    if (cls == "steer-right")
        return "#d62728";
    if (cls == "accel")
        return "#17becf";
    return "#000000";
}

void open_svg(std::ostream& o, double w, double h, std::string_view title)
{
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(w) << "\" height=\"" << f2(h)
      << "\" viewBox=\"0 0 " << f2(w) << ' ' << f2(h) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        o << "<text x=\"10\" y=\"18\" font-size=\"14\">" << escape(title) << "</text>\n";
}

void triangle(std::ostream& o, double x, double y, std::string_view cls, std::string_view fill)
{
    o << "<polygon class=\"" << cls << "\" fill=\"" << fill << "\" points=\"" << f2(x) << ',' << f2(y - 5) << ' '
      << f2(x - 4.5) << ',' << f2(y + 3.5) << ' ' << f2(x + 4.5) << ',' << f2(y + 3.5) << "\"/>\n";
}

} // namespace

std::string_view phase_class(const TrialRow& row)
{
    if (row.phase == Phase::Accelerating || row.cmd == Stimulus::Accelerate)
        return "accel";
    if (row.cmd == Stimulus::LeftCercus)
        return "steer-left";
    if (row.cmd == Stimulus::RightCercus)
        return "steer-right";
    return "free";
}

std::string svg_trajectory(const std::vector<TrialRow>& rows, const Arena& arena, const NavParams& nav,
                           std::string_view title)
{
    if (rows.empty())
        throw std::invalid_argument("svg_trajectory: empty record");
    const Rect& b = arena.bounds();
    const double margin = 30.0;
    const double scale = 640.0 / std::max(b.width(), b.height());
    const double W = b.width() * scale + 2 * margin, H = b.height() * scale + 2 * margin;
    auto X = [&](double x) { return margin + (x - b.xmin) * scale; };
    auto Y = [&](double y) { return margin + (b.ymax - y) * scale; };

    std::ostringstream o;
    open_svg(o, W, H, title);
    o << "<rect class=\"bounds\" x=\"" << f2(X(b.xmin)) << "\" y=\"" << f2(Y(b.ymax)) << "\" width=\""
      << f2(b.width() * scale) << "\" height=\"" << f2(b.height() * scale)
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (const auto& s : arena.obstacles())
        o << "<line class=\"obstacle\" x1=\"" << f2(X(s.a.x)) << "\" y1=\"" << f2(Y(s.a.y)) << "\" x2=\""
          << f2(X(s.b.x)) << "\" y2=\"" << f2(Y(s.b.y)) << "\" stroke=\"" << (s.climbable() ? "#b08040" : "#444")
          << "\" stroke-linecap=\"round\" stroke-width=\"" << f2(std::max(1.0, s.thickness * scale)) << "\"/>\n";
    auto disc = [&](const Disc& d, std::string_view cls, std::string_view fill) {
        o << "<circle class=\"" << cls << "\" cx=\"" << f2(X(d.center.x)) << "\" cy=\"" << f2(Y(d.center.y))
          << "\" r=\"" << f2(d.radius * scale) << "\" fill=\"" << fill << "\" fill-opacity=\"0.3\" stroke=\"" << fill
          << "\"/>\n";
    };
    disc(arena.origin(), "origin", "#999999");
    for (const auto& t : arena.targets())
        disc(t, "target", "#ff7f0e");

    std::size_t start = 0;
    while (start < rows.size()) {
        const std::string_view cls = phase_class(rows[start]);
        std::size_t end = start;
        while (end + 1 < rows.size() && phase_class(rows[end + 1]) == cls)
            ++end;
        const std::size_t last = std::min(end + 1, rows.size() - 1);
        o << "<path class=\"segment " << cls << "\" fill=\"none\" stroke=\"" << colour(cls)
          << "\" stroke-width=\"1.5\" d=\"M" << f2(X(rows[start].pose.position.x)) << ','
          << f2(Y(rows[start].pose.position.y));
        for (std::size_t i = start + 1; i <= last; ++i)
            o << " L" << f2(X(rows[i].pose.position.x)) << ',' << f2(Y(rows[i].pose.position.y));
        o << "\"/>\n";
        start = end + 1;
    }
    for (const auto& r : rows) {
        const double x = X(r.pose.position.x), y = Y(r.pose.position.y);
        if (r.omega_sampled && *r.omega_sampled < nav.omega_t_dps)
            triangle(o, x, y, "marker omega", "#1f77b4");
        if (r.vl_sampled && *r.vl_sampled < nav.v_t_cmps)
            triangle(o, x, y, "marker v_l", "#e377c2");
    }
    o << "</svg>\n";
    return o.str();
}

std::string svg_trajectory(const MissionRecord& rec, const Arena& arena, const NavParams& nav, std::string_view title)
{
    std::vector<TrialRow> rows;
    for (std::size_t i = 0; i < rec.legs.size(); ++i) {
        const auto& r = rec.legs[i].record.rows;
        rows.insert(rows.end(), r.begin() + (i == 0 || r.empty() ? 0 : 1), r.end());
    }
    return svg_trajectory(rows, arena, nav, title);
}

std::string svg_batch_bars(const std::vector<BatchBar>& bars, std::string_view title)
{
    if (bars.empty())
        throw std::invalid_argument("svg_batch_bars: no bars");
    std::vector<std::string> groups, series;
    for (const auto& b : bars) {
        if (std::find(groups.begin(), groups.end(), b.group) == groups.end())
            groups.push_back(b.group);
        if (std::find(series.begin(), series.end(), b.series) == series.end())
            series.push_back(b.series);
    }
    static constexpr const char* palette[] = {"#7f7f7f", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    const double bar_w = 28.0, gap = 24.0, panel_h = 220.0, left = 60.0;
    const double group_w = bar_w * series.size() + gap;
    const double W = left + group_w * groups.size() + 20.0;
    const double H = 2 * panel_h + 120.0;
    double nav_max = 1.0;
    for (const auto& b : bars)
        if (b.navigation_time.n)
            nav_max = std::max(nav_max, b.navigation_time.mean + b.navigation_time.sd.value_or(0.0));
    nav_max = std::ceil(nav_max / 10.0) * 10.0;

    std::ostringstream o;
    open_svg(o, W, H, title);
    for (int panel = 0; panel < 2; ++panel) {
        const double top = 40.0 + panel * (panel_h + 40.0), base = top + panel_h;
        const double vmax = panel == 0 ? 1.0 : nav_max;
        o << "<text x=\"10\" y=\"" << f2(top - 6) << "\">" << (panel == 0 ? "success rate" : "navigation time (s)")
          << "</text>\n";
        o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(base) << "\" x2=\"" << f2(W - 10) << "\" y2=\"" << f2(base)
          << "\" stroke=\"#000\"/>\n";
        o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(top) << "\" x2=\"" << f2(left) << "\" y2=\"" << f2(base)
          << "\" stroke=\"#000\"/>\n";
        o << "<text x=\"" << f2(left - 6) << "\" y=\"" << f2(top + 4) << "\" text-anchor=\"end\">"
          << (panel == 0 ? "100%" : f2(vmax)) << "</text>\n";
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const double gx = left + gap / 2 + gi * group_w;
            o << "<text x=\"" << f2(gx + bar_w * series.size() / 2) << "\" y=\"" << f2(base + 16)
              << "\" text-anchor=\"middle\">" << escape(groups[gi]) << "</text>\n";
            for (std::size_t si = 0; si < series.size(); ++si) {
                const auto it = std::find_if(bars.begin(), bars.end(), [&](const BatchBar& b) {
                    return b.group == groups[gi] && b.series == series[si];
                });
                if (it == bars.end())
                    continue;
                const double v = panel == 0 ? it->success_rate : (it->navigation_time.n ? it->navigation_time.mean : 0.0);
                const double h = panel_h * std::clamp(v / vmax, 0.0, 1.0);
                const double x = gx + si * bar_w;
                o << "<rect class=\"bar " << (panel == 0 ? "success" : "navtime") << "\" x=\"" << f2(x + 2)
                  << "\" y=\"" << f2(base - h) << "\" width=\"" << f2(bar_w - 4) << "\" height=\"" << f2(h)
                  << "\" fill=\"" << palette[si % 6] << "\"><title>" << escape(it->series) << ' '
                  << escape(it->group) << ": " << f2(v) << "</title></rect>\n";
                if (panel == 1 && it->navigation_time.sd) {
                    const double sd = *it->navigation_time.sd;
                    const double y0 = base - panel_h * std::clamp((v - sd) / vmax, 0.0, 1.0);
                    const double y1 = base - panel_h * std::clamp((v + sd) / vmax, 0.0, 1.0);
                    const double cx = x + bar_w / 2;
                    o << "<path class=\"whisker\" stroke=\"#000\" fill=\"none\" d=\"M" << f2(cx) << ',' << f2(y0)
                      << " L" << f2(cx) << ',' << f2(y1) << " M" << f2(cx - 5) << ',' << f2(y1) << " L"
                      << f2(cx + 5) << ',' << f2(y1) << "\"/>\n";
                }
            }
        }
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double y = H - 30.0, x = left + si * 140.0;
        o << "<rect x=\"" << f2(x) << "\" y=\"" << f2(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
          << palette[si % 6] << "\"/><text x=\"" << f2(x + 18) << "\" y=\"" << f2(y) << "\">" << escape(series[si])
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string svg_detection_timeline(const std::vector<DetectionLogEntry>& frames, std::string_view title)
{
    if (frames.empty())
        throw std::invalid_argument("svg_detection_timeline: no frames");
    const double left = 60.0, top = 40.0, w = 800.0, h = 160.0, gap = 40.0;
    const double W = left + w + 60.0, H = top + 2 * h + gap + 50.0;
    const double t_max = std::max(1.0, frames.back().t_s);
    int count_max = 2 * kGateThreshold;
    double score_abs = 1.0;
    for (const auto& f : frames) {
        count_max = std::max(count_max, f.hot_count);
        if (f.score)
            score_abs = std::max(score_abs, std::abs(*f.score));
    }
    auto X = [&](double t) { return left + w * t / t_max; };
    auto Yc = [&](double c) { return top + h - h * c / count_max; };
    const double s_top = top + h + gap;
    auto Ys = [&](double s) { return s_top + h / 2 - (h / 2) * s / score_abs; };

    std::ostringstream o;
    open_svg(o, W, H, title);
    o << "<text x=\"10\" y=\"" << f2(top - 6) << "\">pixels in 28-38 C</text>\n";
    o << "<rect x=\"" << f2(left) << "\" y=\"" << f2(top) << "\" width=\"" << f2(w) << "\" height=\"" << f2(h)
      << "\" fill=\"none\" stroke=\"#000\"/>\n";
    o << "<line class=\"gate-threshold\" x1=\"" << f2(left) << "\" y1=\"" << f2(Yc(kGateThreshold)) << "\" x2=\""
      << f2(left + w) << "\" y2=\"" << f2(Yc(kGateThreshold)) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    o << "<polyline class=\"gate-count\" fill=\"none\" stroke=\"#1f77b4\" points=\"";
    for (std::size_t i = 0; i < frames.size(); ++i)
        o << (i ? " " : "") << f2(X(frames[i].t_s)) << ',' << f2(Yc(frames[i].hot_count));
    o << "\"/>\n";

    o << "<text x=\"10\" y=\"" << f2(s_top - 6) << "\">classifier score</text>\n";
    o << "<rect x=\"" << f2(left) << "\" y=\"" << f2(s_top) << "\" width=\"" << f2(w) << "\" height=\"" << f2(h)
      << "\" fill=\"none\" stroke=\"#000\"/>\n";
    o << "<line x1=\"" << f2(left) << "\" y1=\"" << f2(Ys(0)) << "\" x2=\"" << f2(left + w) << "\" y2=\"" << f2(Ys(0))
      << "\" stroke=\"#999\"/>\n";
    for (const auto& f : frames) {
        if (!f.score)
            continue;
        const bool human = f.label == DetectionLabel::Human;
        o << "<circle class=\"score " << (human ? "human" : "nonhuman") << "\" cx=\"" << f2(X(f.t_s)) << "\" cy=\""
          << f2(Ys(*f.score)) << "\" r=\"3\" fill=\"" << (human ? "#d62728" : "#7f7f7f") << "\"/>\n";
    }
    o << "<text x=\"" << f2(left + w / 2) << "\" y=\"" << f2(H - 12) << "\" text-anchor=\"middle\">time (s), 0 to "
      << f2(t_max) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

} // namespace biobot
