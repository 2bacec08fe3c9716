#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cppe/repeater_model.hpp"

namespace cppe {

/// Parameter sweep over distance (distance curves) or over (T2, eta_o) (ratio maps).
struct SweepSpec {
    RepeaterParams params;
    MemoryModel memory;
    std::vector<double> lengths_km;     ///< distance axis
    std::vector<double> t2_grid_s;      ///< heatmap axis
    std::vector<double> eta_o_grid;     ///< heatmap axis
    double heatmap_length_km = 500.0;
    int n_max = 64;
    /// Repetition rate of the direct-transmission benchmark; 0 means "same as params.nu_hz".
    double nu_direct_hz = 0.0;
    unsigned threads = 1;

    double direct_rate_hz() const { return nu_direct_hz > 0.0 ? nu_direct_hz : params.nu_hz; }
};

struct DistanceRow {
    double length_km = 0.0;
    int n_links_opt = 1;
    double storage_time_s = 0.0;
    double p_repeater = 0.0;
    double p_direct = 0.0;
    double ratio = 0.0;          ///< repeater rate over direct rate
    bool n_links_stepped = false;  ///< n_l* differs from the previous row's
};

struct HeatmapCell {
    double t2_s = 0.0;
    double eta_o = 0.0;
    double ratio = 0.0;
    int n_links_opt = 1;
};

/// Named memory operating point evaluated alongside a heatmap.
struct HeatmapMarker {
    std::string label;
    double t2_s = 0.0;
    double eta_o = 0.0;
};

/// Demonstrated memory (star) and achievable target (triangle).
std::vector<HeatmapMarker> default_heatmap_markers();

std::vector<DistanceRow> sweep_distance(const SweepSpec& spec);

/// Row-major over (T2 outer, eta_o inner).
std::vector<HeatmapCell> sweep_ratio_heatmap(const SweepSpec& spec);

/// Evaluates the heatmap ratio at arbitrary (T2, eta_o) points with the spec's other
/// parameters.
std::vector<HeatmapCell> evaluate_heatmap_points(const SweepSpec& spec,
                                                 const std::vector<HeatmapMarker>& points);

/// First length in the table at which the repeater beats direct transmission, or a
/// negative value when it never does. Bisection refines between the bracketing rows.
double find_crossover_length(const SweepSpec& spec, const std::vector<DistanceRow>& rows);

void write_distance_csv(std::ostream& out, const std::vector<DistanceRow>& rows);
void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells);

}  // namespace cppe
