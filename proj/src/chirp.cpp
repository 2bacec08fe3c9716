#include "cppe/chirp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cppe/error.hpp"

namespace cppe {

void ChirpPulse::validate() const {
    if (!(a0_rad_s >= 0.0)) throw InvalidParameter("chirp amplitude must be >= 0");
    if (!(tau_cp_s > 0.0)) throw InvalidParameter("chirp duration must be > 0");
    if (!(delta_hz >= 0.0)) throw InvalidParameter("chirp span must be >= 0");
}

std::complex<double> chirp_waveform(const ChirpPulse& pulse, double t) {
    if (t < pulse.t_start_s || t > pulse.end()) return {0.0, 0.0};
    const double t_rel = t - pulse.center();
    const double envelope = pulse.a0_rad_s / std::cosh(10.0 * t_rel / pulse.tau_cp_s);
    const double phase =
        2.0 * std::numbers::pi *
            (pulse.omega0_hz * t_rel + pulse.delta_hz * t_rel * t_rel / pulse.tau_cp_s) +
        pulse.phase0_rad;
    return std::polar(envelope, -phase);
}

double chirp_frequency(const ChirpPulse& pulse, double t) {
    const double t_rel = t - pulse.center();
    return pulse.omega0_hz + 2.0 * t_rel * pulse.delta_hz / pulse.tau_cp_s;
}

double adiabaticity_factor(const ChirpPulse& pulse) {
    if (pulse.delta_hz == 0.0) return std::numeric_limits<double>::infinity();
    return pulse.a0_rad_s * pulse.a0_rad_s * pulse.tau_cp_s /
           (2.0 * std::numbers::pi * pulse.delta_hz);
}

double a0_for_adiabaticity(double q, double tau_cp_s, double delta_hz) {
    if (!(q >= 0.0) || !(tau_cp_s > 0.0) || !(delta_hz >= 0.0)) {
        throw InvalidParameter("adiabaticity inputs out of range");
    }
    return std::sqrt(q * 2.0 * std::numbers::pi * delta_hz / tau_cp_s);
}

}  // namespace cppe
