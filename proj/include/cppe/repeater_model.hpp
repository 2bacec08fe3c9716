#pragma once

// Closed-form model of a spectro-temporally multiplexed quantum repeater.
//
// An elementary link of length L/n_l carries idler photons from two pair sources to a
// midpoint Bell-state measurement. Each of the M = M_s * M_t modes heralds
// independently; the signal photons wait in on-demand memories for the round trip
// L/(n_l v) and are then swapped pairwise across the n_l - 1 interior nodes.

namespace cppe {

/// Speed of light in vacuum (km/s).
inline constexpr double kSpeedOfLightKmPerS = 299792.458;
/// Group index of SMF-28 fiber.
inline constexpr double kSmf28GroupIndex = 1.468;

struct RepeaterParams {
    double rho = 0.9;                ///< pair-generation probability per mode
    double alpha_db_per_km = 0.21;   ///< fiber attenuation
    int beta = 2;                    ///< detection-scheme exponent
    double eta_d_i = 0.9;            ///< idler detection efficiency
    double eta_d_s = 0.9;            ///< signal detection efficiency
    int m_t = 20;                    ///< temporal modes
    int m_s = 3;                     ///< spectral modes
    double velocity_km_s = kSpeedOfLightKmPerS / kSmf28GroupIndex;
    double nu_hz = 1.0;              ///< repetition rate of the storage cycle

    long long multimode_capacity() const { return static_cast<long long>(m_t) * m_s; }

    /// Throws InvalidParameter when any field is outside its domain.
    void validate() const;
};

struct MemoryModel {
    double eta_o = 0.65;        ///< efficiency in the zero-storage-time limit
    double t2_s = 3e-3;         ///< coherence time governing the efficiency decay
    double t1_s = 10.68e-3;     ///< excited-state lifetime
    double noise_scale = 0.0;   ///< noise counts per second per unit residual excitation

    void validate() const;
};

struct LinkConfig {
    double total_length_km = 0.0;
    int n_links = 1;

    /// Zero length is accepted as the lossless limit.
    void validate() const;
};

struct LinkOptimum {
    int n_links = 1;
    double success_probability = 0.0;
    double storage_time_s = 0.0;
};

/// t = 10^(-alpha * (L / (2 n_l)) / 10): transmittance from a source to its link midpoint.
double half_link_transmittance(const RepeaterParams& params, const LinkConfig& link);

/// p = (rho * t * eta_d_i)^beta / 2: one mode heralds a link.
double per_mode_link_success(const RepeaterParams& params, const LinkConfig& link);

/// 1 - (1 - p)^M: at least one of the M multiplexed modes heralds a link.
double link_herald_probability(const RepeaterParams& params, const LinkConfig& link);

/// eta_o * exp(-4 T_s / T2).
double memory_efficiency(const MemoryModel& memory, double storage_time_s);

/// Round trip between a memory and its link's midpoint: L / (n_l v).
double required_storage_time(const RepeaterParams& params, const LinkConfig& link);

/// End-to-end success probability of one repeater cycle. The memory efficiency is
/// evaluated at required_storage_time(params, link).
double success_probability(const RepeaterParams& params, const MemoryModel& memory,
                           const LinkConfig& link);

/// Single source, idler over the full length, both photons detected.
double direct_transmission_probability(const RepeaterParams& params, double total_length_km);

/// Exhaustive scan of n_l in [1, n_max]; ties resolve to the smaller n_l.
LinkOptimum optimize_links(const RepeaterParams& params, const MemoryModel& memory,
                           double total_length_km, int n_max = 64);

/// R = nu * P_s.
double distribution_rate(double nu_hz, double success_probability);

}  // namespace cppe
