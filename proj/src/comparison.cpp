#include "biobot/comparison.hpp"

#include <cstdio>
#include <sstream>

namespace biobot {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

} // namespace

std::vector<ComparisonCell> run_comparison(const std::vector<TerrainKind>& terrains,
                                           const std::vector<ControllerKind>& controllers,
                                           const std::vector<std::uint64_t>& seeds, const TrialSetup& setup,
                                           unsigned threads)
{
    std::vector<ComparisonCell> out;
    for (auto t : terrains) {
        const Arena arena = build_terrain(t);
        for (auto c : controllers) {
            ComparisonCell cell{t, c, run_batch(seeds, arena, c, setup, threads), {}};
            cell.stats = aggregate(cell.records);
            out.push_back(std::move(cell));
        }
    }
    return out;
}

const ComparisonCell* find_cell(const std::vector<ComparisonCell>& cells, TerrainKind t, ControllerKind c)
{
    for (const auto& cell : cells)
        if (cell.terrain == t && cell.controller == c)
            return &cell;
    return nullptr;
}

std::vector<Criterion> terrain_criteria(const std::vector<ComparisonCell>& cells)
{
    std::vector<Criterion> out;
    const auto* ls = find_cell(cells, TerrainKind::LowObstacle, ControllerKind::Simple);
    const auto* lp = find_cell(cells, TerrainKind::LowObstacle, ControllerKind::Predictive);
    const auto* ts = find_cell(cells, TerrainKind::TallWall, ControllerKind::Simple);
    const auto* tp = find_cell(cells, TerrainKind::TallWall, ControllerKind::Predictive);
    if (ls)
        out.push_back({"LowObstacle Simple success >= 95%", fmt("%.1f%% (n=%.0f)", 100 * ls->stats.success_rate, ls->stats.n),
                       ls->stats.success_rate >= 0.95});
    if (lp)
        out.push_back({"LowObstacle Predictive success >= 95%",
                       fmt("%.1f%% (n=%.0f)", 100 * lp->stats.success_rate, lp->stats.n), lp->stats.success_rate >= 0.95});
    if (ts)
        out.push_back({"TallWall Simple success <= 50%", fmt("%.1f%% (n=%.0f)", 100 * ts->stats.success_rate, ts->stats.n),
                       ts->stats.success_rate <= 0.50});
    if (tp)
        out.push_back({"TallWall Predictive success >= 80%",
                       fmt("%.1f%% (n=%.0f)", 100 * tp->stats.success_rate, tp->stats.n), tp->stats.success_rate >= 0.80});
    if (ts && tp) {
        const double gap = tp->stats.success_rate - ts->stats.success_rate;
        out.push_back({"TallWall success gap >= 30 points", fmt("%.1f points", 100 * gap), gap >= 0.30 - 1e-12});
        const auto& s = ts->stats.navigation_time;
        const auto& p = tp->stats.navigation_time;
        out.push_back({"TallWall navigation time Predictive < Simple",
                       fmt("%.2f s vs %.2f s", p.mean, s.mean), s.n > 0 && p.n > 0 && p.mean < s.mean});
    }
    return out;
}

std::vector<Criterion> backward_criteria(const std::vector<ComparisonCell>& cells)
{
    const auto* ts = find_cell(cells, TerrainKind::TallWall, ControllerKind::Simple);
    const auto* tp = find_cell(cells, TerrainKind::TallWall, ControllerKind::Predictive);
    if (!ts || !tp)
        return {};
    const double s = ts->stats.backward_time.mean, p = tp->stats.backward_time.mean;
    const double ratio = p > 0.0 ? s / p : (s > 0.0 ? 1e9 : 0.0);
    return {{"TallWall backward time Simple/Predictive >= 3", fmt("%.2f s / %.2f s = %.2f", s, p, ratio), ratio >= 3.0}};
}

std::vector<Criterion> climb_criteria(const std::vector<ComparisonCell>& cells, std::size_t min_climbs)
{
    std::vector<TrialRecord> pooled;
    for (const auto& c : cells)
        if (c.terrain == TerrainKind::LowObstacle)
            pooled.insert(pooled.end(), c.records.begin(), c.records.end());
    if (pooled.empty())
        return {};
    const BatchStats s = aggregate(pooled);
    const std::size_t climbs = s.climb_orthogonal + s.climb_edge;
    std::vector<Criterion> out;
    out.push_back({"LowObstacle climbing trials >= " + std::to_string(min_climbs), std::to_string(climbs),
                   climbs >= min_climbs});
    out.push_back({"orthogonal climb theta mean in [67, 83]",
                   fmt("%.2f +- %.2f deg", s.theta_orthogonal.mean, s.theta_orthogonal.sd.value_or(0.0)),
                   s.theta_orthogonal.n > 0 && s.theta_orthogonal.mean >= 67.0 && s.theta_orthogonal.mean <= 83.0});
    out.push_back({"edge climb theta mean in [31, 47]",
                   fmt("%.2f +- %.2f deg", s.theta_edge.mean, s.theta_edge.sd.value_or(0.0)),
                   s.theta_edge.n > 0 && s.theta_edge.mean >= 31.0 && s.theta_edge.mean <= 47.0});
    out.push_back({"orthogonal climbs are the majority",
                   fmt("%.0f orthogonal / %.0f edge", s.climb_orthogonal, s.climb_edge),
                   s.climb_orthogonal > s.climb_edge});
    return out;
}

std::vector<Criterion> dominance_criteria(const std::vector<ComparisonCell>& cells)
{
    std::vector<Criterion> out;
    for (auto t : {TerrainKind::NoObstacle, TerrainKind::LowObstacle, TerrainKind::TallWall}) {
        const auto* s = find_cell(cells, t, ControllerKind::Simple);
        const auto* p = find_cell(cells, t, ControllerKind::Predictive);
        if (!s || !p)
            continue;
        out.push_back({std::string(to_string(t)) + " Predictive success >= Simple",
                       fmt("%.1f%% vs %.1f%%", 100 * p->stats.success_rate, 100 * s->stats.success_rate),
                       p->stats.success_rate >= s->stats.success_rate});
    }
    return out;
}

std::string comparison_table(const std::vector<ComparisonCell>& cells)
{
    std::ostringstream o;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-11s %5s %8s %16s %16s %5s %5s %5s\n", "terrain", "algorithm", "n",
                  "success", "nav time s", "backward s", "imm+", "imm", "t/o");
    o << line;
    for (const auto& c : cells) {
        const auto& s = c.stats;
        auto ms = [](const MeanSd& m) {
            char b[40];
            if (!m.n)
                return std::string("-");
            std::snprintf(b, sizeof b, "%.2f+-%.2f", m.mean, m.sd.value_or(0.0));
            return std::string(b);
        };
        std::snprintf(line, sizeof line, "%-12s %-11s %5zu %7.1f%% %16s %16s %5zu %5zu %5zu\n",
                      std::string(to_string(c.terrain)).c_str(), std::string(to_string(c.controller)).c_str(), s.n,
                      100.0 * s.success_rate, ms(s.navigation_time).c_str(), ms(s.backward_time).c_str(),
                      s.immobile_stimulated, s.immobile_unstimulated, s.timeouts);
        o << line;
    }
    return o.str();
}

} // namespace biobot
