#pragma once

#include <complex>

namespace cppe {

/// Sech-envelope, linearly chirped control pulse.
///
///   A(t) = a0 * sech(10 t_rel / tau_cp),   f(t_rel) = omega0 + 2 t_rel delta / tau_cp
///
/// with t_rel measured from the pulse center and the pulse truncated to
/// [t_start, t_start + tau_cp]. Frequencies are in Hz relative to the laser frame, so the
/// sweep covers omega0 - delta .. omega0 + delta.
struct ChirpPulse {
    double a0_rad_s = 0.0;   ///< peak Rabi frequency
    double tau_cp_s = 30e-6;
    double delta_hz = 1.5e6;
    double omega0_hz = 0.0;
    double t_start_s = 0.0;
    double phase0_rad = 0.0;

    double center() const { return t_start_s + 0.5 * tau_cp_s; }
    double end() const { return t_start_s + tau_cp_s; }

    void validate() const;
};

/// Complex Rabi drive A(t) exp(-i phi(t)); exactly zero outside the pulse support.
std::complex<double> chirp_waveform(const ChirpPulse& pulse, double t);

/// Instantaneous drive frequency (Hz) at absolute time t.
double chirp_frequency(const ChirpPulse& pulse, double t);

/// Q = a0^2 tau_cp / (2 pi delta).
double adiabaticity_factor(const ChirpPulse& pulse);

/// Peak Rabi frequency giving adiabaticity factor q.
double a0_for_adiabaticity(double q, double tau_cp_s, double delta_hz);

}  // namespace cppe
