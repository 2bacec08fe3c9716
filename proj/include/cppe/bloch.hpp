#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "cppe/chirp.hpp"

namespace cppe {

/// Pure state of a two-level atom in the laser frame.
struct TwoLevelState {
    std::complex<double> g{1.0, 0.0};
    std::complex<double> e{0.0, 0.0};

    double norm2() const { return std::norm(g) + std::norm(e); }
    double excited_population() const { return std::norm(e); }
    /// rho_eg = e * conj(g)
    std::complex<double> coherence() const { return e * std::conj(g); }
};

/// Element of SU(2) acting on (g, e): [[a, -conj(b)], [b, conj(a)]].
struct Su2 {
    std::complex<double> a{1.0, 0.0};
    std::complex<double> b{0.0, 0.0};

    TwoLevelState apply(const TwoLevelState& s) const {
        return {a * s.g - std::conj(b) * s.e, b * s.g + std::conj(a) * s.e};
    }
    /// this * first
    Su2 after(const Su2& first) const {
        return {a * first.a - std::conj(b) * first.b, b * first.a + std::conj(a) * first.b};
    }
};

using DriveFunction = std::function<std::complex<double>(double)>;

/// Drive values at the two Gauss-Legendre nodes of each fixed step on [t0, t1].
/// Shared by every atom that is propagated over the same interval.
struct DriveSamples {
    double t0 = 0.0;
    double step = 0.0;
    std::vector<std::complex<double>> node1;
    std::vector<std::complex<double>> node2;

    std::size_t steps() const { return node1.size(); }
};

/// Uses the smallest number of equal steps not exceeding max_dt.
DriveSamples sample_drive(const DriveFunction& drive, double t0, double t1, double max_dt);

/// Fourth-order Magnus propagator over the sampled interval for an atom detuned by
/// detuning_hz from the laser frame. Each step is an exact SU(2) exponential, so the
/// result is unitary to rounding error.
Su2 magnus_propagator(const DriveSamples& samples, double detuning_hz);

/// Ideal instantaneous rotation of the given area about an equatorial axis at `phase`.
Su2 hard_rotation(double area_rad, double phase_rad);

/// Largest step resolving a chirped pulse for an atom at detuning_hz:
/// min(1 / (20 (|delta - omega0| + Delta)), 1 / (20 a0 / 2 pi)).
double max_step_for(const ChirpPulse& pulse, double detuning_hz);

/// Integrates the two-level equations of motion under a chirped pulse from t0 to t1.
/// Throws ConfigurationError when dt exceeds max_step_for(pulse, detuning_hz).
TwoLevelState propagate(const TwoLevelState& state, const ChirpPulse& pulse,
                        double detuning_hz, double t0, double t1, double dt);

/// Same integrator for an arbitrary drive; the caller is responsible for resolving it.
TwoLevelState propagate_drive(const TwoLevelState& state, const DriveFunction& drive,
                              double detuning_hz, double t0, double t1, double dt);

/// Final excited population per detuning after `pulse`, starting from the ground state.
/// dt <= 0 selects max_step_for / refinement for each detuning.
std::vector<double> inversion_profile(const ChirpPulse& pulse, std::span<const double> detunings_hz,
                                      double dt = 0.0, double refinement = 1.0,
                                      unsigned threads = 1);

}  // namespace cppe
