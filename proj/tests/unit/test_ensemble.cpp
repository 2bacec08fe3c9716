#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cppe/ensemble.hpp"
#include "cppe/error.hpp"

using namespace cppe;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle: composite Simpson quadrature of |integral Omega(t) exp(i 2 pi df (t - tc)) dt|.
double quadrature_weight(const InputPulse& in, double df, double half_span, int n) {
    const double h = 2.0 * half_span / n;
    std::complex<double> sum{};
    for (int k = 0; k <= n; ++k) {
        const double u = -half_span + k * h;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double env = std::abs(input_drive(in, in.center_s + u));
        sum += w * env * std::polar(1.0, 2.0 * kPi * df * u);
    }
    return std::abs(sum) * h / 3.0;
}

}  // namespace

TEST(InputSpectralWeight, PeaksAtCarrier) {
    InputPulse in;
    in.offset_hz = 0.2e6;
    const double peak = input_spectral_weight(in, 0.0);
    EXPECT_DOUBLE_EQ(peak, in.area);
    for (double df : {-1e6, -1e5, 1e4, 3e5}) EXPECT_LT(input_spectral_weight(in, df), peak);
}

TEST(InputSpectralWeight, LorentzianMatchesQuadrature) {
    InputPulse in;
    in.area = 0.05;
    for (double df : {0.0, 0.1e6, 0.3e6, 0.8e6}) {
        const double oracle = quadrature_weight(in, df, 4000 * in.fwhm_s, 4000000);
        EXPECT_NEAR(input_spectral_weight(in, df), oracle, 0.01 * in.area) << df;
    }
}

TEST(InputSpectralWeight, GaussianMatchesQuadrature) {
    InputPulse in;
    in.shape = InputShape::Gaussian;
    for (double df : {0.0, 0.2e6, 0.6e6}) {
        const double oracle = quadrature_weight(in, df, 10 * in.fwhm_s, 20000);
        EXPECT_NEAR(input_spectral_weight(in, df), oracle, 1e-3 * in.area) << df;
    }
}

// Oracle: integrate the weak input directly with the two-level integrator for one atom and
// compare its coherence with the first-order imprint.
TEST(ImprintInput, MatchesDirectIntegration) {
    for (auto shape : {InputShape::Gaussian, InputShape::Lorentzian}) {
        InputPulse in;
        in.area = 0.01;
        in.center_s = 0.0;
        in.offset_hz = 0.1e6;
        in.shape = shape;
        const double span = shape == InputShape::Gaussian ? 10 * in.fwhm_s : 400 * in.fwhm_s;
        for (double delta : {0.1e6, -0.2e6, 0.45e6}) {
            const DriveFunction drive = [&in](double t) { return input_drive(in, t); };
            const auto direct = propagate_drive(TwoLevelState{}, drive, delta, -span, span, 2e-9);

            MemoryCellSpec cell;
            cell.center_hz = delta;
            cell.width_hz = 1.0;
            cell.atom_count = 1;
            auto ens = make_ensemble({cell}, -span);
            imprint_input(ens, in, 1e300, 1e300);
            free_evolve(ens, span, 1e300, 1e300);
            const auto c = ens.coherence[0];
            EXPECT_LE(std::abs(c - direct.coherence()), 0.02 * std::abs(c)) << "delta " << delta;
        }
    }
}

TEST(ImprintInput, MacroscopicCoherenceDephases) {
    MemoryCellSpec cell;
    auto ens = make_ensemble({cell});
    InputPulse in;
    in.center_s = 1e-6;
    imprint_input(ens, in, 1e300, 1e300);
    const double s0 = std::abs(macroscopic_coherence(ens));
    free_evolve(ens, in.center_s + 5.0 / cell.width_hz, 1e300, 1e300);
    EXPECT_LT(std::abs(macroscopic_coherence(ens)), 0.2 * s0);
}

TEST(FreeEvolve, DampsCoherenceAndPopulation) {
    MemoryCellSpec cell;
    cell.atom_count = 3;
    auto ens = make_ensemble({cell});
    for (std::size_t j = 0; j < ens.size(); ++j) {
        ens.coherence[j] = {0.3, 0.1};
        ens.excited[j] = 0.6;
    }
    free_evolve(ens, 2e-4, 1e-3, 4e-3);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        EXPECT_NEAR(std::abs(ens.coherence[j]), std::abs(std::complex<double>{0.3, 0.1}) * std::exp(-0.2), 1e-15);
        EXPECT_NEAR(ens.excited[j], 0.6 * std::exp(-0.05), 1e-15);
    }
    EXPECT_THROW(free_evolve(ens, 1e-4, 1e-3, 4e-3), InvalidParameter);
}

TEST(ApplyPropagators, MatchesPureStateEvolution) {
    MemoryCellSpec cell;
    cell.atom_count = 1;
    auto ens = make_ensemble({cell});
    TwoLevelState s;
    s.g = {0.6, 0.2};
    s.e = std::polar(std::sqrt(1.0 - std::norm(s.g)), 0.7);
    ens.excited[0] = s.excited_population();
    ens.coherence[0] = s.coherence();
    const Su2 u{std::polar(0.8, 0.3), std::polar(0.6, -1.1)};
    apply_propagators(ens, {u});
    const auto t = u.apply(s);
    EXPECT_NEAR(ens.excited[0], t.excited_population(), 1e-14);
    EXPECT_NEAR(std::abs(ens.coherence[0] - t.coherence()), 0.0, 1e-14);
}

TEST(MakeEnsemble, StratifiedMidpoints) {
    MemoryCellSpec a;
    a.center_hz = 0.0;
    a.width_hz = 1e6;
    a.atom_count = 4;
    MemoryCellSpec b = a;
    b.center_hz = 4e6;
    const auto ens = make_ensemble({a, b});
    ASSERT_EQ(ens.size(), 8u);
    EXPECT_DOUBLE_EQ(ens.detuning_hz[0], -0.375e6);
    EXPECT_DOUBLE_EQ(ens.detuning_hz[3], 0.375e6);
    EXPECT_DOUBLE_EQ(ens.detuning_hz[4], 4e6 - 0.375e6);
    EXPECT_EQ(ens.cell[4], 1);
    for (double w : ens.weight) EXPECT_EQ(w, 1.0);
}

TEST(ValidateCells, RejectsCloseOrOverlappingCells) {
    MemoryCellSpec a;
    MemoryCellSpec b;
    b.center_hz = 3e6;
    EXPECT_THROW(validate_cells({a, b}), InvalidParameter);
    b.center_hz = 4e6;
    EXPECT_NO_THROW(validate_cells({a, b}));
    b.width_hz = 7e6;
    EXPECT_THROW(validate_cells({a, b}), InvalidParameter);
    MemoryCellSpec bad;
    bad.atom_count = 0;
    EXPECT_THROW(validate_cells({bad}), InvalidParameter);
}
