#include "cppe/bloch.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cppe/error.hpp"
#include "cppe/parallel.hpp"

namespace cppe {

namespace {

constexpr double kPi = std::numbers::pi;
// Gauss-Legendre nodes on [0, 1].
constexpr double kNode1 = 0.5 - 0.28867513459481288225;
constexpr double kNode2 = 0.5 + 0.28867513459481288225;
constexpr double kCommutatorWeight = 0.28867513459481288225;  // sqrt(3) / 6

struct Vec3 {
    double x, y, z;
};

// H = hx sx + hy sy + hz sz in the (g, e) basis, with H_eg = drive / 2 and
// H_ee - H_gg = 2 pi detuning.
Vec3 hamiltonian(std::complex<double> drive, double hz) {
    return {0.5 * drive.real(), 0.5 * drive.imag(), hz};
}

Su2 exp_minus_i(const Vec3& v) {
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (n == 0.0) return {};
    const double c = std::cos(n);
    const double s = std::sin(n) / n;
    return {{c, -s * v.z}, {s * v.y, -s * v.x}};
}

}  // namespace

DriveSamples sample_drive(const DriveFunction& drive, double t0, double t1, double max_dt) {
    if (!(t1 >= t0)) throw InvalidParameter("propagation interval must be ordered");
    if (!(max_dt > 0.0)) throw ConfigurationError("step size must be > 0");
    DriveSamples s;
    s.t0 = t0;
    const double span = t1 - t0;
    const auto steps = static_cast<std::size_t>(std::ceil(span / max_dt - 1e-9));
    if (steps == 0) return s;
    s.step = span / static_cast<double>(steps);
    s.node1.resize(steps);
    s.node2.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double tk = t0 + static_cast<double>(k) * s.step;
        s.node1[k] = drive(tk + kNode1 * s.step);
        s.node2[k] = drive(tk + kNode2 * s.step);
    }
    return s;
}

Su2 magnus_propagator(const DriveSamples& samples, double detuning_hz) {
    const double h = samples.step;
    const double hz = -kPi * detuning_hz;
    Su2 u;
    for (std::size_t k = 0; k < samples.steps(); ++k) {
        const Vec3 h1 = hamiltonian(samples.node1[k], hz);
        const Vec3 h2 = hamiltonian(samples.node2[k], hz);
        // (h2 x h1); the z components are equal so only x, y terms of the sum differ.
        const Vec3 cross{h2.y * h1.z - h2.z * h1.y, h2.z * h1.x - h2.x * h1.z,
                         h2.x * h1.y - h2.y * h1.x};
        const double c = kCommutatorWeight * h * h;
        const Vec3 v{0.5 * h * (h1.x + h2.x) + c * cross.x, 0.5 * h * (h1.y + h2.y) + c * cross.y,
                     0.5 * h * (h1.z + h2.z) + c * cross.z};
        u = exp_minus_i(v).after(u);
    }
    return u;
}

Su2 hard_rotation(double area_rad, double phase_rad) {
    // Generator (area / 2) (cos(phase) sx + sin(phase) sy).
    const double half = 0.5 * area_rad;
    return exp_minus_i({half * std::cos(phase_rad), half * std::sin(phase_rad), 0.0});
}

double max_step_for(const ChirpPulse& pulse, double detuning_hz) {
    const double sweep = std::abs(detuning_hz - pulse.omega0_hz) + pulse.delta_hz;
    const double rabi_hz = pulse.a0_rad_s / (2.0 * kPi);
    double bound = std::numeric_limits<double>::infinity();
    if (sweep > 0.0) bound = std::min(bound, 1.0 / (20.0 * sweep));
    if (rabi_hz > 0.0) bound = std::min(bound, 1.0 / (20.0 * rabi_hz));
    if (!std::isfinite(bound)) bound = pulse.tau_cp_s / 20.0;
    return bound;
}

TwoLevelState propagate(const TwoLevelState& state, const ChirpPulse& pulse,
                        double detuning_hz, double t0, double t1, double dt) {
    pulse.validate();
    const double bound = max_step_for(pulse, detuning_hz);
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
        throw ConfigurationError("step size " + std::to_string(dt) +
                                 " s does not resolve the pulse (limit " + std::to_string(bound) +
                                 " s)");
    }
    return propagate_drive(
        state, [&pulse](double t) { return chirp_waveform(pulse, t); }, detuning_hz, t0, t1, dt);
}

TwoLevelState propagate_drive(const TwoLevelState& state, const DriveFunction& drive,
                              double detuning_hz, double t0, double t1, double dt) {
    const DriveSamples samples = sample_drive(drive, t0, t1, dt);
    return magnus_propagator(samples, detuning_hz).apply(state);
}

std::vector<double> inversion_profile(const ChirpPulse& pulse, std::span<const double> detunings_hz,
                                      double dt, double refinement, unsigned threads) {
    pulse.validate();
    if (!(refinement >= 1.0)) throw InvalidParameter("step refinement must be >= 1");
    std::vector<double> result(detunings_hz.size());
    parallel_for(result.size(), threads, [&](std::size_t i) {
        const double delta = detunings_hz[i];
        const double step = dt > 0.0 ? dt : max_step_for(pulse, delta) / refinement;
        const TwoLevelState out =
            propagate(TwoLevelState{}, pulse, delta, pulse.t_start_s, pulse.end(), step);
        result[i] = out.excited_population();
    });
    return result;
}

}  // namespace cppe
