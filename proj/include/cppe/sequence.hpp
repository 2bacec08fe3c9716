#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cppe/chirp.hpp"
#include "cppe/ensemble.hpp"
#include "cppe/repeater_model.hpp"

namespace cppe {

enum class PulseRole { Store, Recall };

/// A chirped control pulse addressed to one memory cell.
struct ControlPulse {
    ChirpPulse pulse;
    int cell = 0;
    PulseRole role = PulseRole::Store;
};

/// Ideal instantaneous rotation applied to every atom (two-pulse-echo mode).
struct HardPulse {
    double time_s = 0.0;
    double area_rad = 3.14159265358979323846;
    double phase_rad = 0.0;
};

/// Input modes and control pulses of one storage cycle. Times are absolute; tau1_s and
/// tau2_s record the nominal delays the schedule was built from (input to CP1 start, and
/// CP1 end to CP2 start).
struct PulseSchedule {
    std::vector<InputPulse> inputs;
    std::vector<ControlPulse> controls;
    std::vector<HardPulse> hard_pulses;
    double tau1_s = 0.0;
    double tau2_s = 0.0;
};

/// Storage time of a single-cell schedule: 2 (tau2 + tau_cp).
double storage_time(double tau2_s, double tau_cp_s);

/// One input at t = 0 followed by CP1 at tau1 and an identical CP2 tau2 after CP1 ends.
PulseSchedule single_cell_schedule(const InputPulse& input, const ChirpPulse& cp_template,
                                   double tau1_s, double tau2_s);

struct TimeWindow {
    std::string kind;  ///< "echo", "primary", "cp_echo", "control"
    double start_s = 0.0;
    double end_s = 0.0;
    int cell = -1;
    int input = -1;

    double center() const { return 0.5 * (start_s + end_s); }
    bool contains(double t) const { return t >= start_s && t < end_s; }
};

/// Time-binned macroscopic coherence S(t) = sum_j w_j rho_eg_j(t). Samples inside
/// control-pulse windows are gated to zero, as the detection path does.
struct EmissionTrace {
    std::vector<double> time_s;
    std::vector<std::complex<double>> coherence;
    std::vector<double> intensity;
    /// Per memory cell ("channel") coherence, same grid.
    std::vector<std::vector<std::complex<double>>> cell_coherence;
    std::vector<TimeWindow> windows;

    std::vector<double> channel_intensity(int cell) const;
    /// Windows of the given kind, in annotation order.
    std::vector<TimeWindow> windows_of(const std::string& kind) const;
};

struct SequenceOptions {
    double output_dt_s = 20e-9;
    double output_start_s = 0.0;
    /// <= output_start_s selects the last annotated window end plus a margin.
    double output_end_s = 0.0;
    /// Divides the resolving step bound for every atom/pulse group.
    double step_refinement = 1.0;
    /// Explicit integrator step; must satisfy the resolving bound for every atom.
    double fixed_dt_s = 0.0;
    /// Laser frequency offset applied to recall pulses in this cycle.
    double recall_offset_hz = 0.0;
    /// Half-width of echo windows in units of the input FWHM.
    double window_halfwidth_fwhm = 2.0;
    /// Turn timing-rule warnings into errors.
    bool strict_timing = false;
    /// Subtract the coherence of the same cycle run without inputs (control-pulse
    /// background), channel by channel, before intensities are formed.
    bool subtract_background = false;
    unsigned threads = 1;
};

struct SequenceResult {
    EmissionTrace trace;
    /// rho_ee per atom after the last control pulse, and the time it refers to.
    std::vector<double> final_excited;
    std::vector<double> atom_weight;
    std::vector<int> atom_cell;
    double population_time_s = 0.0;
    /// Energy of an ideal, undamped rephasing of each input in its channel, integrated over
    /// an echo-sized window on the output grid.
    std::vector<double> reference_energy;
    std::vector<std::string> warnings;
    std::vector<double> adiabaticity;  ///< per control pulse
};

/// Non-fatal timing problems (2 tau1 >= tau2, echo overlapping a control pulse, ...).
std::vector<std::string> check_schedule(const PulseSchedule& schedule,
                                        const std::vector<MemoryCellSpec>& cells);

/// Expected echo, primary-echo and CP-echo windows plus gated control intervals.
std::vector<TimeWindow> annotate_windows(const PulseSchedule& schedule,
                                         const std::vector<MemoryCellSpec>& cells,
                                         double halfwidth_fwhm = 2.0);

SequenceResult run_sequence(const PulseSchedule& schedule, const std::vector<MemoryCellSpec>& cells,
                            const MemoryModel& memory, const SequenceOptions& options = {});

struct JitterAverage {
    EmissionTrace mean;                 ///< intensity and coherence averaged over cycles
    std::vector<double> offsets_hz;
    std::vector<EmissionTrace> cycles;  ///< individual traces when requested
};

/// Repeats the cycle with a zero-mean Gaussian laser offset (std sigma_hz) on the recall
/// pulses and averages the traces.
JitterAverage run_jitter_average(const PulseSchedule& schedule,
                                 const std::vector<MemoryCellSpec>& cells,
                                 const MemoryModel& memory, const SequenceOptions& options,
                                 double sigma_hz, int n_cycles, std::uint64_t seed,
                                 bool keep_cycles = false);

void write_trace_csv(std::ostream& out, const EmissionTrace& trace);

}  // namespace cppe
