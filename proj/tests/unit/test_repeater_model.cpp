#include <gtest/gtest.h>

#include <cmath>

#include "cppe/error.hpp"
#include "cppe/repeater_model.hpp"

using namespace cppe;

namespace {

LinkConfig link(double length, int n) { return {length, n}; }

MemoryModel perfect_memory() {
    MemoryModel m;
    m.eta_o = 1.0;
    m.t2_s = 1e30;
    return m;
}

}  // namespace

TEST(HalfLinkTransmittance, ZeroLengthIsUnity) {
    RepeaterParams p;
    for (int n : {1, 3, 17}) EXPECT_DOUBLE_EQ(half_link_transmittance(p, link(0.0, n)), 1.0);
}

TEST(HalfLinkTransmittance, DecibelExponent) {
    RepeaterParams p;
    EXPECT_NEAR(half_link_transmittance(p, link(500.0, 5)), std::pow(10.0, -1.05), 1e-15);
    EXPECT_NEAR(half_link_transmittance(p, link(500.0, 5)), 0.08913, 1e-5);
}

TEST(HalfLinkTransmittance, LosslessFiber) {
    RepeaterParams p;
    p.alpha_db_per_km = 0.0;
    EXPECT_DOUBLE_EQ(half_link_transmittance(p, link(1000.0, 2)), 1.0);
}

TEST(HalfLinkTransmittance, ScalingIdentity) {
    RepeaterParams p;
    for (int k : {2, 3, 4}) {
        const double a = half_link_transmittance(p, link(840.0, 12));
        const double b = half_link_transmittance(p, link(840.0 / k, 12 / k));
        EXPECT_NEAR(a, b, 1e-14 * a);
    }
}

TEST(HalfLinkTransmittance, RejectsInvalidLink) {
    RepeaterParams p;
    EXPECT_THROW(half_link_transmittance(p, link(-1.0, 1)), InvalidParameter);
    EXPECT_THROW(half_link_transmittance(p, link(10.0, 0)), InvalidParameter);
}

TEST(PerModeLinkSuccess, IdealComponents) {
    RepeaterParams p;
    p.rho = 1.0;
    p.eta_d_i = 1.0;
    EXPECT_DOUBLE_EQ(per_mode_link_success(p, link(0.0, 1)), 0.5);
}

TEST(PerModeLinkSuccess, TableValuesAtZeroLength) {
    RepeaterParams p;
    EXPECT_NEAR(per_mode_link_success(p, link(0.0, 1)), 0.32805, 1e-15);
}

TEST(PerModeLinkSuccess, NoPairs) {
    RepeaterParams p;
    p.rho = 0.0;
    EXPECT_EQ(per_mode_link_success(p, link(100.0, 2)), 0.0);
}

TEST(MemoryEfficiency, Law) {
    MemoryModel m;
    m.eta_o = 0.2305;
    m.t2_s = 858.4e-6;
    EXPECT_DOUBLE_EQ(memory_efficiency(m, 0.0), 0.2305);
    EXPECT_NEAR(memory_efficiency(m, 300e-6), 0.2305 * std::exp(-1.2e-3 / 858.4e-6), 1e-15);
    EXPECT_NEAR(memory_efficiency(m, 300e-6), 0.05696, 1e-5);
    m.t2_s = 1e300;
    EXPECT_DOUBLE_EQ(memory_efficiency(m, 1.0), 0.2305);
    EXPECT_THROW(memory_efficiency(m, -1e-9), InvalidParameter);
}

TEST(RequiredStorageTime, RoundTripPerLink) {
    RepeaterParams p;
    EXPECT_NEAR(required_storage_time(p, link(400.0, 2)), 0.979344e-3, 1e-8);
    EXPECT_EQ(required_storage_time(p, link(0.0, 3)), 0.0);
    EXPECT_NEAR(required_storage_time(p, link(600.0, 6)), 0.5 * required_storage_time(p, link(600.0, 3)),
                1e-18);
}

TEST(SuccessProbability, SingleLinkSingleMode) {
    RepeaterParams p;
    p.m_s = 1;
    p.m_t = 1;
    EXPECT_NEAR(success_probability(p, perfect_memory(), link(0.0, 1)), 0.32805 * 0.81, 1e-15);
}

TEST(SuccessProbability, NoPairsNoSuccess) {
    RepeaterParams p;
    p.rho = 0.0;
    EXPECT_EQ(success_probability(p, MemoryModel{}, link(300.0, 3)), 0.0);
}

TEST(SuccessProbability, SaturatesWithManyModes) {
    RepeaterParams p;
    p.eta_d_s = 1.0;
    p.m_s = 1000;
    p.m_t = 1000;
    EXPECT_NEAR(success_probability(p, perfect_memory(), link(10.0, 1)), 1.0, 1e-12);
}

TEST(SuccessProbability, ComposesFactors) {
    RepeaterParams p;
    MemoryModel m;
    const LinkConfig l = link(300.0, 3);
    const double pm = per_mode_link_success(p, l);
    const double herald = 1.0 - std::pow(1.0 - pm, 60.0);
    const double eta_m = memory_efficiency(m, required_storage_time(p, l));
    const double expected = std::pow(herald, 3) * std::pow(0.9 * eta_m, 6) / 4.0;
    EXPECT_NEAR(success_probability(p, m, l), expected, 1e-12 * expected);
}

TEST(SuccessProbability, BoundedOverParameterGrid) {
    for (double rho : {0.0, 0.3, 1.0}) {
        for (double eta : {0.0, 0.5, 1.0}) {
            for (int n : {1, 2, 7}) {
                for (double length : {0.0, 50.0, 2000.0}) {
                    RepeaterParams p;
                    p.rho = rho;
                    p.eta_d_i = eta;
                    p.eta_d_s = eta;
                    MemoryModel m;
                    m.eta_o = eta;
                    const double ps = success_probability(p, m, link(length, n));
                    EXPECT_GE(ps, 0.0);
                    EXPECT_LE(ps, 1.0);
                }
            }
        }
    }
}

TEST(SuccessProbability, MonotoneInEachParameter) {
    const LinkConfig l = link(250.0, 3);
    auto at = [&](auto mutate, double value) {
        RepeaterParams p;
        MemoryModel m;
        mutate(p, m, value);
        return success_probability(p, m, l);
    };
    using Mut = void (*)(RepeaterParams&, MemoryModel&, double);
    const Mut mutators[] = {
        [](RepeaterParams& p, MemoryModel&, double v) { p.rho = v; },
        [](RepeaterParams& p, MemoryModel&, double v) { p.eta_d_i = v; },
        [](RepeaterParams& p, MemoryModel&, double v) { p.eta_d_s = v; },
        [](RepeaterParams&, MemoryModel& m, double v) { m.eta_o = v; },
        [](RepeaterParams&, MemoryModel& m, double v) { m.t2_s = 1e-4 + 1e-2 * v; },
        [](RepeaterParams& p, MemoryModel&, double v) { p.m_s = 1 + static_cast<int>(10 * v); },
        [](RepeaterParams& p, MemoryModel&, double v) { p.m_t = 1 + static_cast<int>(10 * v); },
    };
    for (auto mut : mutators) {
        double prev = -1.0;
        for (int k = 0; k <= 20; ++k) {
            const double v = at(mut, k / 20.0);
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(SuccessProbability, DependsOnlyOnModeProduct) {
    MemoryModel m;
    RepeaterParams a;
    a.m_s = 3;
    a.m_t = 20;
    RepeaterParams b = a;
    b.m_s = 12;
    b.m_t = 5;
    RepeaterParams c = a;
    c.m_s = 60;
    c.m_t = 1;
    for (double length : {10.0, 200.0, 800.0}) {
        const double pa = success_probability(a, m, link(length, 4));
        EXPECT_DOUBLE_EQ(pa, success_probability(b, m, link(length, 4)));
        EXPECT_DOUBLE_EQ(pa, success_probability(c, m, link(length, 4)));
    }
}

TEST(DirectTransmission, Examples) {
    RepeaterParams p;
    EXPECT_NEAR(direct_transmission_probability(p, 0.0), 0.729, 1e-15);
    EXPECT_NEAR(direct_transmission_probability(p, 500.0), 0.729 * std::pow(10.0, -10.5), 1e-24);
    EXPECT_NEAR(direct_transmission_probability(p, 500.0), 2.30e-11, 0.01e-11);
    p.alpha_db_per_km = 0.0;
    EXPECT_DOUBLE_EQ(direct_transmission_probability(p, 0.0), direct_transmission_probability(p, 900.0));
}

TEST(OptimizeLinks, ZeroLengthPrefersOneLink) {
    RepeaterParams p;
    const auto opt = optimize_links(p, MemoryModel{}, 0.0, 64);
    EXPECT_EQ(opt.n_links, 1);
}

TEST(OptimizeLinks, MatchesExhaustiveScan) {
    RepeaterParams p;
    MemoryModel m;
    for (double length : {100.0, 300.0, 500.0, 1000.0}) {
        const auto opt = optimize_links(p, m, length, 50);
        int best = 1;
        double best_p = -1.0;
        for (int n = 1; n <= 50; ++n) {
            const double ps = success_probability(p, m, link(length, n));
            EXPECT_GE(opt.success_probability, ps);
            if (ps > best_p) {
                best_p = ps;
                best = n;
            }
        }
        EXPECT_EQ(opt.n_links, best);
        EXPECT_DOUBLE_EQ(opt.success_probability, best_p);
        EXPECT_DOUBLE_EQ(opt.storage_time_s, required_storage_time(p, link(length, best)));
    }
}

TEST(OptimizeLinks, ArgmaxInvariantUnderLog) {
    RepeaterParams p;
    MemoryModel m;
    for (double length : {150.0, 450.0, 750.0}) {
        const auto opt = optimize_links(p, m, length, 64);
        int best = 1;
        double best_log = -INFINITY;
        for (int n = 1; n <= 64; ++n) {
            const double lp = std::log(success_probability(p, m, link(length, n)));
            if (lp > best_log) {
                best_log = lp;
                best = n;
            }
        }
        EXPECT_EQ(opt.n_links, best);
    }
}

TEST(OptimizeLinks, TiesGoToFewerLinks) {
    RepeaterParams p;
    p.rho = 0.0;
    EXPECT_EQ(optimize_links(p, MemoryModel{}, 300.0, 10).n_links, 1);
}

TEST(DistributionRate, Examples) {
    EXPECT_DOUBLE_EQ(distribution_rate(1.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(distribution_rate(1.0, 0.0), 0.0);
    EXPECT_NEAR(distribution_rate(1e6, 2.3e-11), 2.3e-5, 1e-20);
    EXPECT_THROW(distribution_rate(1.0, 1.5), InvalidParameter);
}

TEST(Validation, RejectsOutOfDomainParameters) {
    RepeaterParams p;
    p.rho = 1.1;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = RepeaterParams{};
    p.beta = 0;
    EXPECT_THROW(p.validate(), InvalidParameter);
    p = RepeaterParams{};
    p.m_t = 0;
    EXPECT_THROW(p.validate(), InvalidParameter);
    MemoryModel m;
    m.t2_s = 0.0;
    EXPECT_THROW(m.validate(), InvalidParameter);
}
