#include "cppe/repeater_model.hpp"

#include <cmath>
#include <string>

#include "cppe/error.hpp"

namespace cppe {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InvalidParameter(what);
}

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void RepeaterParams::validate() const {
    require(is_probability(rho), "rho must lie in [0, 1]");
    require(std::isfinite(alpha_db_per_km) && alpha_db_per_km >= 0.0, "alpha must be >= 0");
    require(beta >= 1, "beta must be a positive integer");
    require(is_probability(eta_d_i), "eta_d_i must lie in [0, 1]");
    require(is_probability(eta_d_s), "eta_d_s must lie in [0, 1]");
    require(m_t >= 1 && m_s >= 1, "mode counts must be >= 1");
    require(std::isfinite(velocity_km_s) && velocity_km_s > 0.0, "velocity must be > 0");
    require(std::isfinite(nu_hz) && nu_hz >= 0.0, "repetition rate must be >= 0");
}

void MemoryModel::validate() const {
    require(is_probability(eta_o), "eta_o must lie in [0, 1]");
    require(t2_s > 0.0, "T2 must be > 0");
    require(t1_s > 0.0, "T1 must be > 0");
    require(std::isfinite(noise_scale) && noise_scale >= 0.0, "noise_scale must be >= 0");
}

void LinkConfig::validate() const {
    require(std::isfinite(total_length_km) && total_length_km >= 0.0,
            "total length must be >= 0");
    require(n_links >= 1, "n_links must be >= 1");
}

double half_link_transmittance(const RepeaterParams& params, const LinkConfig& link) {
    params.validate();
    link.validate();
    const double half_link_km = link.total_length_km / (2.0 * link.n_links);
    return std::pow(10.0, -params.alpha_db_per_km * half_link_km / 10.0);
}

double per_mode_link_success(const RepeaterParams& params, const LinkConfig& link) {
    const double t = half_link_transmittance(params, link);
    return 0.5 * std::pow(params.rho * t * params.eta_d_i, params.beta);
}

double link_herald_probability(const RepeaterParams& params, const LinkConfig& link) {
    const double p = per_mode_link_success(params, link);
    const auto modes = static_cast<double>(params.multimode_capacity());
    // 1 - (1 - p)^M without cancellation for small p.
    return -std::expm1(modes * std::log1p(-p));
}

double memory_efficiency(const MemoryModel& memory, double storage_time_s) {
    memory.validate();
    if (!(storage_time_s >= 0.0)) throw InvalidParameter("storage time must be >= 0");
    return memory.eta_o * std::exp(-4.0 * storage_time_s / memory.t2_s);
}

double required_storage_time(const RepeaterParams& params, const LinkConfig& link) {
    params.validate();
    link.validate();
    return link.total_length_km / (link.n_links * params.velocity_km_s);
}

double success_probability(const RepeaterParams& params, const MemoryModel& memory,
                           const LinkConfig& link) {
    const double herald = link_herald_probability(params, link);
    const double eta_m = memory_efficiency(memory, required_storage_time(params, link));
    const int n = link.n_links;
    return std::pow(herald, n) * std::pow(params.eta_d_s * eta_m, 2 * n) /
           std::ldexp(1.0, n - 1);
}

double direct_transmission_probability(const RepeaterParams& params, double total_length_km) {
    params.validate();
    if (!(total_length_km >= 0.0)) throw InvalidParameter("total length must be >= 0");
    return params.rho * std::pow(10.0, -params.alpha_db_per_km * total_length_km / 10.0) *
           params.eta_d_i * params.eta_d_s;
}

LinkOptimum optimize_links(const RepeaterParams& params, const MemoryModel& memory,
                           double total_length_km, int n_max) {
    if (n_max < 1) throw InvalidParameter("n_max must be >= 1");
    LinkOptimum best;
    best.success_probability = -1.0;
    for (int n = 1; n <= n_max; ++n) {
        const LinkConfig link{total_length_km, n};
        const double ps = success_probability(params, memory, link);
        if (ps > best.success_probability) {
            best = {n, ps, required_storage_time(params, link)};
        }
    }
    return best;
}

double distribution_rate(double nu_hz, double success_probability) {
    if (!(success_probability >= 0.0 && success_probability <= 1.0)) {
        throw InvalidParameter("success probability must lie in [0, 1]");
    }
    if (!(nu_hz >= 0.0)) throw InvalidParameter("repetition rate must be >= 0");
    return nu_hz * success_probability;
}

}  // namespace cppe
