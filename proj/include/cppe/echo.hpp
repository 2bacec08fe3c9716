#pragma once

#include <span>
#include <vector>

#include "cppe/repeater_model.hpp"
#include "cppe/sequence.hpp"

namespace cppe {

struct EchoMetrics {
    bool present = false;
    double peak_time_s = 0.0;   ///< parabolic refinement of the sampled maximum
    double centroid_s = 0.0;
    double peak_intensity = 0.0;
    double energy = 0.0;        ///< trapezoidal integral of the intensity over the window
    double efficiency_proxy = 0.0;
    double fwhm_s = 0.0;
};

/// Trapezoidal integral of intensity over the grid points inside [start, end).
double window_energy(std::span<const double> time_s, std::span<const double> intensity,
                     double start_s, double end_s);

/// Metrics of the emission inside [start, end). The echo is absent when the peak does not
/// exceed noise_floor; energy is still reported. reference_energy <= 0 leaves the
/// efficiency proxy at zero.
EchoMetrics echo_metrics(std::span<const double> time_s, std::span<const double> intensity,
                         double start_s, double end_s, double reference_energy,
                         double noise_floor = 0.0);

/// Same, on a trace window; channel >= 0 selects one memory cell's emission.
EchoMetrics echo_metrics(const EmissionTrace& trace, const TimeWindow& window,
                         double reference_energy, double noise_floor = 0.0, int channel = -1);

/// Expected spontaneous-emission counts in [start, end): residual excitation
/// sum_j w_j p_j (populations taken at population_time_s) decaying with T1, scaled by
/// the memory's noise_scale (counts per second per unit excitation).
double expected_noise_counts(std::span<const double> excited, std::span<const double> weights,
                             double population_time_s, const MemoryModel& memory,
                             double start_s, double end_s);

double expected_noise_counts(const SequenceResult& result, const MemoryModel& memory,
                             double start_s, double end_s);

struct SnrValue {
    double value = 0.0;
    bool infinite = false;
};

/// signal / noise; a zero noise count reports the infinite flag.
SnrValue snr_ratio(double signal_counts, double noise_counts);

}  // namespace cppe
