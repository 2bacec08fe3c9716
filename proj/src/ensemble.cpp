#include "cppe/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cppe/error.hpp"

namespace cppe {

namespace {

constexpr double kPi = std::numbers::pi;
const double kFourLn2 = 4.0 * std::log(2.0);

double envelope(const InputPulse& input, double u) {
    const double w = input.fwhm_s;
    switch (input.shape) {
        case InputShape::Lorentzian: {
            const double x = 2.0 * u / w;
            return input.area * (2.0 / (kPi * w)) / (1.0 + x * x);
        }
        case InputShape::Gaussian:
            return input.area / (w * std::sqrt(kPi / kFourLn2)) * std::exp(-kFourLn2 * u * u / (w * w));
    }
    return 0.0;
}

}  // namespace

void MemoryCellSpec::validate() const {
    if (atom_count < 1) throw InvalidParameter("cell needs at least one atom");
    if (!(width_hz > 0.0)) throw InvalidParameter("cell width must be > 0");
    if (profile == CellProfile::LorentzianTruncated && !(lorentzian_fwhm_hz > 0.0)) {
        throw InvalidParameter("Lorentzian cell profile needs a positive FWHM");
    }
}

void validate_cells(const std::vector<MemoryCellSpec>& cells, double min_spacing_hz) {
    if (cells.empty()) throw InvalidParameter("at least one memory cell is required");
    for (const auto& c : cells) c.validate();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            const double gap = std::abs(cells[i].center_hz - cells[j].center_hz);
            if (gap < min_spacing_hz) {
                throw InvalidParameter("memory cells closer than the minimum spacing");
            }
            if (gap < 0.5 * (cells[i].width_hz + cells[j].width_hz)) {
                throw InvalidParameter("memory cells overlap");
            }
        }
    }
}

std::complex<double> input_drive(const InputPulse& input, double t) {
    return std::polar(envelope(input, t - input.center_s), -2.0 * kPi * input.offset_hz * t);
}

double input_spectral_weight(const InputPulse& input, double df_hz) {
    const double w = input.fwhm_s;
    switch (input.shape) {
        case InputShape::Lorentzian:
            return input.area * std::exp(-kPi * w * std::abs(df_hz));
        case InputShape::Gaussian:
            return input.area * std::exp(-kPi * kPi * df_hz * df_hz * w * w / kFourLn2);
    }
    return 0.0;
}

AtomEnsemble make_ensemble(const std::vector<MemoryCellSpec>& cells, double start_time_s) {
    AtomEnsemble ens;
    ens.time_s = start_time_s;
    ens.cell_count = static_cast<int>(cells.size());
    std::size_t total = 0;
    for (const auto& c : cells) {
        c.validate();
        total += static_cast<std::size_t>(c.atom_count);
    }
    ens.detuning_hz.reserve(total);
    ens.weight.reserve(total);
    ens.cell.reserve(total);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        const double stratum = c.width_hz / c.atom_count;
        for (int j = 0; j < c.atom_count; ++j) {
            const double offset = -0.5 * c.width_hz + (j + 0.5) * stratum;
            double w = 1.0;
            if (c.profile == CellProfile::LorentzianTruncated) {
                const double x = 2.0 * offset / c.lorentzian_fwhm_hz;
                w = 1.0 / (1.0 + x * x);
            }
            ens.detuning_hz.push_back(c.center_hz + offset);
            ens.weight.push_back(w);
            ens.cell.push_back(static_cast<int>(k));
        }
    }
    ens.excited.assign(total, 0.0);
    ens.coherence.assign(total, {0.0, 0.0});
    return ens;
}

void free_evolve(AtomEnsemble& ens, double until_s, double t2_s, double t1_s) {
    const double dt = until_s - ens.time_s;
    if (dt < -1e-15) throw InvalidParameter("ensemble cannot evolve backwards in time");
    if (dt <= 0.0) {
        ens.time_s = std::max(ens.time_s, until_s);
        return;
    }
    const double damp = std::exp(-dt / t2_s);
    const double relax = std::exp(-dt / t1_s);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        ens.coherence[j] *= std::polar(damp, -2.0 * kPi * ens.detuning_hz[j] * dt);
        ens.excited[j] *= relax;
    }
    ens.time_s = until_s;
}

void imprint_input(AtomEnsemble& ens, const InputPulse& input, double t2_s, double t1_s) {
    free_evolve(ens, input.center_s, t2_s, t1_s);
    const std::complex<double> carrier = std::polar(1.0, -2.0 * kPi * input.offset_hz * input.center_s);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const double w = input_spectral_weight(input, ens.detuning_hz[j] - input.offset_hz);
        ens.coherence[j] += std::complex<double>(0.0, -0.5 * w) * carrier;
    }
}

void apply_propagators(AtomEnsemble& ens, const std::vector<Su2>& props) {
    if (props.size() != ens.size()) throw InvalidParameter("one propagator per atom required");
    for (std::size_t j = 0; j < ens.size(); ++j) {
        const auto a = props[j].a;
        const auto b = props[j].b;
        const double p = ens.excited[j];
        const auto c = ens.coherence[j];
        const double pg = 1.0 - p;
        ens.excited[j] = std::norm(b) * pg + std::norm(a) * p + 2.0 * (a * b * std::conj(c)).real();
        ens.coherence[j] = std::conj(a) * b * (pg - p) + std::conj(a) * std::conj(a) * c -
                           b * b * std::conj(c);
    }
}

std::complex<double> macroscopic_coherence(const AtomEnsemble& ens, int cell) {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t j = 0; j < ens.size(); ++j) {
        if (cell >= 0 && ens.cell[j] != cell) continue;
        sum += ens.weight[j] * ens.coherence[j];
    }
    return sum;
}

}  // namespace cppe
