#pragma once

#include <string>
#include <vector>

#include "cppe/repeater_model.hpp"
#include "cppe/sequence.hpp"

namespace cppe {

/// Control-pulse bandwidth settings (input FWHM, chirp duration, chirp span) with the
/// derived simulation defaults: peak Rabi frequency from the adiabaticity factor, cell
/// width just wider than the chirp span, and an atom count that keeps the sampled
/// grid's revival time (atom_count / cell_width) beyond 1 ms.
struct BandwidthPreset {
    std::string name;
    double input_fwhm_s = 0.0;
    double tau_cp_s = 0.0;
    double delta_hz = 0.0;
    double adiabaticity = 800.0;
    double cell_width_hz = 0.0;
    int atom_count = 2001;

    double a0_rad_s() const;
    ChirpPulse control(double omega0_hz = 0.0, double t_start_s = 0.0) const;
    InputPulse input(double center_s = 0.0, double offset_hz = 0.0) const;
    MemoryCellSpec cell(double center_hz = 0.0) const;
};

/// The three built-in presets, indexed 1..3.
const std::vector<BandwidthPreset>& bandwidth_presets();
const BandwidthPreset& bandwidth_preset(int index);

/// Memory parameters for pulse-level runs: coherence time from the two-pulse-echo decay,
/// T1 from the fluorescence decay.
MemoryModel pulse_memory_defaults();

/// tau2 giving storage time T_s = 2 (tau2 + tau_cp).
double tau2_for_storage(double storage_time_s, double tau_cp_s);

/// Single input at t = 0, stored for storage_time_s.
PulseSchedule preset_single_schedule(const BandwidthPreset& preset, double storage_time_s,
                                     double tau1_s = 10e-6);

/// Train of n_modes inputs spaced by spacing_s, stored together in one cell.
PulseSchedule temporal_train_schedule(const BandwidthPreset& preset, int n_modes,
                                      double spacing_s, double storage_time_s);

/// n_temporal time bins, each carrying a subset of the cells (bit pattern (k mod 7) + 1),
/// consecutive store pulses per cell and a recall pulse only for `recall_cell`.
PulseSchedule spectro_temporal_schedule(const BandwidthPreset& preset,
                                        const std::vector<MemoryCellSpec>& cells, int n_temporal,
                                        double spacing_s, double storage_time_s, int recall_cell);

/// n_temporal inputs in every cell, consecutive store pulses, and recall of cell c at
/// storage_times_s[c].
PulseSchedule sequential_recall_schedule(const BandwidthPreset& preset,
                                         const std::vector<MemoryCellSpec>& cells, int n_temporal,
                                         double spacing_s,
                                         const std::vector<double>& storage_times_s);

/// Cells of one preset at the given centers.
std::vector<MemoryCellSpec> preset_cells(const BandwidthPreset& preset,
                                         const std::vector<double>& centers_hz);

/// Measured reference values, kept as labeled constants. The thin-medium
/// model does not reproduce them; they are compared only by ordering.
namespace reference {
inline constexpr double kEfficiency300us = 0.1036;
inline constexpr double kEfficiency1ms = 0.0142;
inline constexpr double kSnr300us = 10.90;
inline constexpr double kSnr1ms = 1.52;
inline constexpr double kTrainEfficiency = 0.0267;
inline constexpr double kTrainSnr = 9.18;
inline constexpr double kSpectralEfficiencies[3] = {0.0120, 0.0164, 0.0166};
inline constexpr double kSequentialEfficiencies[2] = {0.0933, 0.0208};
inline constexpr double kSequentialTimes_s[2] = {450e-6, 850e-6};
inline constexpr double kMeanPhotonsSingle = 720;
inline constexpr double kMeanPhotonsTrain = 2489;
inline constexpr double kMeanPhotonsBandwidth = 513;
inline constexpr double kPresetEfficiencies[3] = {0.0849, 0.0601, 0.0162};
inline constexpr double kPresetSnr[3] = {5.52, 4.11, 1.42};
inline constexpr double kFitEtaO = 0.2305;
inline constexpr double kFitT2_s = 858.4e-6;
inline constexpr double kMimsT2_s = 806.1e-6;
inline constexpr double kMimsChi = 0.94;
inline constexpr double kT1_s = 10.68e-3;
}  // namespace reference

}  // namespace cppe
