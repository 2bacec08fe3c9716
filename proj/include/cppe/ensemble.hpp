#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cppe/bloch.hpp"

namespace cppe {

enum class CellProfile { Uniform, LorentzianTruncated };

/// One spectral memory cell: a window of the inhomogeneous line.
struct MemoryCellSpec {
    double center_hz = 0.0;
    double width_hz = 1.8e6;
    int atom_count = 2001;
    CellProfile profile = CellProfile::Uniform;
    /// Line FWHM for CellProfile::LorentzianTruncated.
    double lorentzian_fwhm_hz = 10e6;

    void validate() const;
};

/// Minimum center spacing accepted between cells.
inline constexpr double kDefaultMinCellSpacingHz = 4e6;

/// Throws InvalidParameter when cells overlap or sit closer than min_spacing_hz.
void validate_cells(const std::vector<MemoryCellSpec>& cells,
                    double min_spacing_hz = kDefaultMinCellSpacingHz);

enum class InputShape { Lorentzian, Gaussian };

/// Weak probe pulse. `area` is the pulse area in radians (the input's integrated Rabi
/// frequency); the linear regime needs area << 1.
struct InputPulse {
    double center_s = 0.0;
    double area = 0.1;
    double fwhm_s = 0.75e-6;
    double offset_hz = 0.0;
    InputShape shape = InputShape::Lorentzian;
};

/// Rabi frequency of the input at absolute time t (complex: carries the offset).
std::complex<double> input_drive(const InputPulse& input, double t);

/// Fourier weight integral(Omega_in(t) exp(i 2 pi delta t) dt) of the envelope at frequency
/// distance `df_hz` from the input carrier, normalized so that it equals `area` at df = 0.
double input_spectral_weight(const InputPulse& input, double df_hz);

/// Per-atom ensemble state, stored as density-matrix elements so population relaxation
/// can be represented; coherent evolution is by per-pulse SU(2) propagators.
struct AtomEnsemble {
    std::vector<double> detuning_hz;
    std::vector<double> weight;
    std::vector<int> cell;
    std::vector<double> excited;                 ///< rho_ee
    std::vector<std::complex<double>> coherence; ///< rho_eg
    double time_s = 0.0;
    int cell_count = 0;

    std::size_t size() const { return detuning_hz.size(); }
};

/// Deterministic stratified sampling: equal-width strata over each cell, one atom at each
/// stratum midpoint. Atoms of cell k follow those of cell k - 1.
AtomEnsemble make_ensemble(const std::vector<MemoryCellSpec>& cells, double start_time_s = 0.0);

/// Free precession with coherence damping exp(-t / T2) and relaxation exp(-t / T1).
void free_evolve(AtomEnsemble& ensemble, double until_s, double t2_s, double t1_s);

/// Adds the first-order coherence left by a weak input, referenced to its center time.
/// The ensemble is first evolved freely to input.center_s.
void imprint_input(AtomEnsemble& ensemble, const InputPulse& input, double t2_s, double t1_s);

/// rho -> U rho U^dagger for every atom.
void apply_propagators(AtomEnsemble& ensemble, const std::vector<Su2>& propagators);

/// Macroscopic coherence sum_j w_j rho_eg_j over all atoms (cell < 0) or one cell.
std::complex<double> macroscopic_coherence(const AtomEnsemble& ensemble, int cell = -1);

}  // namespace cppe
