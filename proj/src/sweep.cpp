#include "cppe/sweep.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "cppe/csv.hpp"
#include "cppe/error.hpp"
#include "cppe/parallel.hpp"

namespace cppe {

namespace {

void require_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw InvalidParameter(std::string(name) + " grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidParameter(std::string(name) + " grid must be strictly increasing");
        }
    }
}

double rate_ratio(double rep_rate, double direct_rate) {
    if (direct_rate > 0.0) return rep_rate / direct_rate;
    return rep_rate > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

DistanceRow evaluate_distance(const SweepSpec& spec, double length_km) {
    const LinkOptimum best = optimize_links(spec.params, spec.memory, length_km, spec.n_max);
    DistanceRow row;
    row.length_km = length_km;
    row.n_links_opt = best.n_links;
    row.storage_time_s = best.storage_time_s;
    row.p_repeater = best.success_probability;
    row.p_direct = direct_transmission_probability(spec.params, length_km);
    row.ratio = rate_ratio(spec.params.nu_hz * row.p_repeater,
                           spec.direct_rate_hz() * row.p_direct);
    return row;
}

HeatmapCell evaluate_cell(const SweepSpec& spec, double t2_s, double eta_o) {
    MemoryModel memory = spec.memory;
    memory.t2_s = t2_s;
    memory.eta_o = eta_o;
    const LinkOptimum best = optimize_links(spec.params, memory, spec.heatmap_length_km,
                                            spec.n_max);
    const double direct = direct_transmission_probability(spec.params, spec.heatmap_length_km);
    return {t2_s, eta_o,
            rate_ratio(spec.params.nu_hz * best.success_probability,
                       spec.direct_rate_hz() * direct),
            best.n_links};
}

}  // namespace

std::vector<HeatmapMarker> default_heatmap_markers() {
    return {{"star", 804e-6, 0.2305}, {"triangle", 3e-3, 0.65}};
}

std::vector<DistanceRow> sweep_distance(const SweepSpec& spec) {
    require_grid(spec.lengths_km, "distance");
    spec.params.validate();
    spec.memory.validate();
    std::vector<DistanceRow> rows(spec.lengths_km.size());
    parallel_for(rows.size(), spec.threads,
                 [&](std::size_t i) { rows[i] = evaluate_distance(spec, spec.lengths_km[i]); });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        rows[i].n_links_stepped = rows[i].n_links_opt != rows[i - 1].n_links_opt;
    }
    return rows;
}

std::vector<HeatmapCell> sweep_ratio_heatmap(const SweepSpec& spec) {
    require_grid(spec.t2_grid_s, "T2");
    require_grid(spec.eta_o_grid, "eta_o");
    spec.params.validate();
    const std::size_t n_eta = spec.eta_o_grid.size();
    std::vector<HeatmapCell> cells(spec.t2_grid_s.size() * n_eta);
    parallel_for(cells.size(), spec.threads, [&](std::size_t k) {
        cells[k] = evaluate_cell(spec, spec.t2_grid_s[k / n_eta], spec.eta_o_grid[k % n_eta]);
    });
    return cells;
}

std::vector<HeatmapCell> evaluate_heatmap_points(const SweepSpec& spec,
                                                 const std::vector<HeatmapMarker>& points) {
    std::vector<HeatmapCell> cells;
    cells.reserve(points.size());
    for (const auto& p : points) cells.push_back(evaluate_cell(spec, p.t2_s, p.eta_o));
    return cells;
}

double find_crossover_length(const SweepSpec& spec, const std::vector<DistanceRow>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ratio < 1.0) continue;
        if (i == 0) return rows[0].length_km;
        double lo = rows[i - 1].length_km;
        double hi = rows[i].length_km;
        for (int iter = 0; iter < 60 && hi - lo > 1e-9 * hi; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (evaluate_distance(spec, mid).ratio >= 1.0 ? hi : lo) = mid;
        }
        return hi;
    }
    return -1.0;
}

void write_distance_csv(std::ostream& out, const std::vector<DistanceRow>& rows) {
    out << "L_km,n_l_opt,T_s_ms,P_s_repeater,P_direct,ratio\n";
    for (const auto& r : rows) {
        out << format_number(r.length_km) << ',' << r.n_links_opt << ','
            << format_number(r.storage_time_s * 1e3) << ',' << format_number(r.p_repeater) << ','
            << format_number(r.p_direct) << ',' << format_number(r.ratio) << '\n';
    }
}

void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells) {
    out << "T2_ms,eta_o,ratio\n";
    for (const auto& c : cells) {
        out << format_number(c.t2_s * 1e3) << ',' << format_number(c.eta_o) << ','
            << format_number(c.ratio) << '\n';
    }
}

}  // namespace cppe
