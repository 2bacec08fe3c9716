#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cppe/repeater_model.hpp"
#include "cppe/rng.hpp"

namespace cppe {

struct ModeAddress {
    int spectral_index = 0;
    int temporal_index = 0;

    friend bool operator==(const ModeAddress&, const ModeAddress&) = default;
};

/// Which of several successful modes a link reports.
enum class TieBreak { LowestIndex, HighestIndex };

struct McOptions {
    double channel_spacing_hz = 4e6;
    int reference_spectral_index = 0;
    TieBreak tie_break = TieBreak::LowestIndex;
    unsigned threads = 1;
};

/// Event record of one repeater cycle. Per-memory vectors have 2 n_l entries ordered
/// (link 0 left, link 0 right, link 1 left, ...).
struct CycleOutcome {
    std::vector<std::optional<ModeAddress>> heralded;  ///< per link
    std::vector<double> storage_duration_s;            ///< 0 for memories of failed links
    std::vector<bool> recall_success;                  ///< false when recall was not attempted
    std::vector<bool> end_detection;                   ///< retrieved photon detected
    std::vector<bool> swap_success;                    ///< n_l - 1 interior BSMs
    std::vector<double> frequency_shift_hz;            ///< applied before the swap
    bool success = false;

    bool all_links_heralded() const;
    /// The conjunction that defines `success`.
    bool success_condition() const;
};

/// Simulates one cycle. Every cycle consumes the same number of draws in a fixed order,
/// so outcomes for different tie-break rules share their random numbers.
CycleOutcome simulate_cycle(const RepeaterParams& params, const MemoryModel& memory,
                            const LinkConfig& link, RngSpec rng, const McOptions& options = {});

struct McEstimate {
    std::uint64_t n_cycles = 0;
    std::uint64_t successes = 0;
    double frequency = 0.0;
    double standard_error = 0.0;  ///< sqrt(f (1 - f) / n)
    double analytic_p = 0.0;
    double z_score = 0.0;         ///< (f - P) / sqrt(P (1 - P) / n)
    std::vector<std::uint64_t> link_heralds;              ///< per link
    /// Per link, counts of the reported mode indexed by spectral * M_t + temporal.
    std::vector<std::vector<std::uint64_t>> mode_counts;
};

/// Runs cycles with streams rng.stream, rng.stream + 1, ... and aggregates counts.
McEstimate estimate_success(const RepeaterParams& params, const MemoryModel& memory,
                            const LinkConfig& link, std::uint64_t n_cycles, RngSpec rng,
                            const McOptions& options = {});

/// Outcomes for cycles rng.stream .. rng.stream + count - 1, in order.
std::vector<CycleOutcome> simulate_cycles(const RepeaterParams& params,
                                          const MemoryModel& memory, const LinkConfig& link,
                                          std::uint64_t count, RngSpec rng,
                                          const McOptions& options = {});

struct StorageAudit {
    double max_duration_s = 0.0;
    double mean_duration_s = 0.0;   ///< over memories that stored a photon
    std::uint64_t stored_memories = 0;
    double budget_s = 0.0;
    double exceed_fraction = 0.0;   ///< cycles with any duration above the budget
};

/// Longest storage time for which memory_efficiency stays >= min_efficiency
/// (infinite when min_efficiency <= 0, zero when eta_o < min_efficiency).
double storage_budget_for_efficiency(const MemoryModel& memory, double min_efficiency);

StorageAudit storage_time_audit(std::span<const CycleOutcome> outcomes, double budget_s);

/// One JSON object per line, fields in fixed order.
void write_outcome_jsonl(std::ostream& out, std::uint64_t cycle, const CycleOutcome& outcome);

void write_mc_summary_csv(std::ostream& out, const McEstimate& estimate);

}  // namespace cppe
