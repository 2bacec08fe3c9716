#include "cppe/repeater_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "cppe/csv.hpp"
#include "cppe/error.hpp"
#include "cppe/parallel.hpp"

namespace cppe {

namespace {

// Cycles are aggregated in fixed blocks so integer sums never depend on scheduling.
constexpr std::uint64_t kBlockCycles = 4096;

struct CycleModel {
    int n_links = 1;
    int m_s = 1;
    int m_t = 1;
    double p_mode = 0.0;
    double eta_memory = 0.0;
    double eta_detect = 0.0;
    double storage_s = 0.0;
};

CycleModel make_model(const RepeaterParams& params, const MemoryModel& memory,
                      const LinkConfig& link) {
    CycleModel m;
    m.n_links = link.n_links;
    m.m_s = params.m_s;
    m.m_t = params.m_t;
    m.p_mode = per_mode_link_success(params, link);
    m.storage_s = required_storage_time(params, link);
    m.eta_memory = memory_efficiency(memory, m.storage_s);
    m.eta_detect = params.eta_d_s;
    return m;
}

void run_cycle(const CycleModel& m, const McOptions& opt, RngSpec spec, CycleOutcome& out) {
    StreamRng rng(spec);
    const int memories = 2 * m.n_links;
    out.heralded.assign(m.n_links, std::nullopt);
    out.storage_duration_s.assign(memories, 0.0);
    out.recall_success.assign(memories, false);
    out.end_detection.assign(memories, false);
    out.swap_success.assign(std::max(0, m.n_links - 1), false);
    out.frequency_shift_hz.assign(memories, 0.0);

    for (int l = 0; l < m.n_links; ++l) {
        std::optional<ModeAddress> chosen;
        for (int s = 0; s < m.m_s; ++s) {
            for (int t = 0; t < m.m_t; ++t) {
                if (!rng.bernoulli(m.p_mode)) continue;
                if (opt.tie_break == TieBreak::HighestIndex || !chosen) chosen = ModeAddress{s, t};
            }
        }
        out.heralded[l] = chosen;
        if (chosen) {
            const double shift =
                (chosen->spectral_index - opt.reference_spectral_index) * opt.channel_spacing_hz;
            for (int side = 0; side < 2; ++side) {
                out.storage_duration_s[2 * l + side] = m.storage_s;
                out.frequency_shift_hz[2 * l + side] = shift;
            }
        }
    }

    const bool attempt = out.all_links_heralded();
    for (int k = 0; k < memories; ++k) {
        const bool recalled = rng.bernoulli(m.eta_memory);
        const bool detected = rng.bernoulli(m.eta_detect);
        out.recall_success[k] = attempt && recalled;
        out.end_detection[k] = attempt && recalled && detected;
    }
    for (std::size_t k = 0; k < out.swap_success.size(); ++k) {
        const bool bsm = rng.bernoulli(0.5);
        out.swap_success[k] = attempt && bsm;
    }
    out.success = out.success_condition();
}

bool all_true(const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

bool CycleOutcome::all_links_heralded() const {
    return std::all_of(heralded.begin(), heralded.end(),
                       [](const auto& h) { return h.has_value(); });
}

bool CycleOutcome::success_condition() const {
    return all_links_heralded() && all_true(recall_success) && all_true(end_detection) &&
           all_true(swap_success);
}

CycleOutcome simulate_cycle(const RepeaterParams& params, const MemoryModel& memory,
                            const LinkConfig& link, RngSpec rng, const McOptions& options) {
    CycleOutcome out;
    run_cycle(make_model(params, memory, link), options, rng, out);
    return out;
}

std::vector<CycleOutcome> simulate_cycles(const RepeaterParams& params,
                                          const MemoryModel& memory, const LinkConfig& link,
                                          std::uint64_t count, RngSpec rng,
                                          const McOptions& options) {
    const CycleModel model = make_model(params, memory, link);
    std::vector<CycleOutcome> outcomes(count);
    parallel_for(count, options.threads, [&](std::size_t i) {
        run_cycle(model, options, {rng.seed, rng.stream + i}, outcomes[i]);
    });
    return outcomes;
}

McEstimate estimate_success(const RepeaterParams& params, const MemoryModel& memory,
                            const LinkConfig& link, std::uint64_t n_cycles, RngSpec rng,
                            const McOptions& options) {
    if (n_cycles == 0) throw InvalidParameter("n_cycles must be >= 1");
    const CycleModel model = make_model(params, memory, link);
    const std::size_t modes = static_cast<std::size_t>(model.m_s) * model.m_t;

    struct Tally {
        std::uint64_t successes = 0;
        std::vector<std::uint64_t> heralds;
        std::vector<std::vector<std::uint64_t>> modes;
    };
    const std::uint64_t blocks = (n_cycles + kBlockCycles - 1) / kBlockCycles;
    std::vector<Tally> tallies(blocks);
    parallel_for(blocks, options.threads, [&](std::size_t b) {
        Tally& tally = tallies[b];
        tally.heralds.assign(model.n_links, 0);
        tally.modes.assign(model.n_links, std::vector<std::uint64_t>(modes, 0));
        CycleOutcome outcome;
        const std::uint64_t begin = b * kBlockCycles;
        const std::uint64_t end = std::min(n_cycles, begin + kBlockCycles);
        for (std::uint64_t c = begin; c < end; ++c) {
            run_cycle(model, options, {rng.seed, rng.stream + c}, outcome);
            tally.successes += outcome.success ? 1 : 0;
            for (int l = 0; l < model.n_links; ++l) {
                if (const auto& h = outcome.heralded[l]) {
                    ++tally.heralds[l];
                    ++tally.modes[l][static_cast<std::size_t>(h->spectral_index) * model.m_t +
                                     h->temporal_index];
                }
            }
        }
    });

    McEstimate est;
    est.n_cycles = n_cycles;
    est.link_heralds.assign(model.n_links, 0);
    est.mode_counts.assign(model.n_links, std::vector<std::uint64_t>(modes, 0));
    for (const auto& t : tallies) {
        est.successes += t.successes;
        for (int l = 0; l < model.n_links; ++l) {
            est.link_heralds[l] += t.heralds[l];
            for (std::size_t k = 0; k < modes; ++k) est.mode_counts[l][k] += t.modes[l][k];
        }
    }
    const auto n = static_cast<double>(n_cycles);
    est.frequency = static_cast<double>(est.successes) / n;
    est.standard_error = std::sqrt(est.frequency * (1.0 - est.frequency) / n);
    est.analytic_p = success_probability(params, memory, link);
    const double sigma = std::sqrt(est.analytic_p * (1.0 - est.analytic_p) / n);
    const double diff = est.frequency - est.analytic_p;
    if (sigma > 0.0) {
        est.z_score = diff / sigma;
    } else {
        est.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    return est;
}

double storage_budget_for_efficiency(const MemoryModel& memory, double min_efficiency) {
    memory.validate();
    if (min_efficiency <= 0.0) return std::numeric_limits<double>::infinity();
    if (memory.eta_o < min_efficiency) return 0.0;
    return 0.25 * memory.t2_s * std::log(memory.eta_o / min_efficiency);
}

StorageAudit storage_time_audit(std::span<const CycleOutcome> outcomes, double budget_s) {
    if (outcomes.empty()) throw InvalidParameter("storage audit needs at least one outcome");
    StorageAudit audit;
    audit.budget_s = budget_s;
    double sum = 0.0;
    std::uint64_t exceeding = 0;
    for (const auto& o : outcomes) {
        if (o.storage_duration_s.size() != 2 * o.heralded.size()) {
            throw InvalidParameter("outcome needs two storage durations per link");
        }
        bool exceeds = false;
        for (std::size_t k = 0; k < o.storage_duration_s.size(); ++k) {
            if (!o.heralded[k / 2]) continue;
            const double d = o.storage_duration_s[k];
            audit.max_duration_s = std::max(audit.max_duration_s, d);
            sum += d;
            ++audit.stored_memories;
            exceeds = exceeds || d > budget_s;
        }
        exceeding += exceeds ? 1 : 0;
    }
    if (audit.stored_memories > 0) audit.mean_duration_s = sum / audit.stored_memories;
    audit.exceed_fraction = static_cast<double>(exceeding) / outcomes.size();
    return audit;
}

void write_outcome_jsonl(std::ostream& out, std::uint64_t cycle, const CycleOutcome& o) {
    nlohmann::ordered_json j;
    j["cycle"] = cycle;
    j["success"] = o.success;
    auto heralded = nlohmann::ordered_json::array();
    for (const auto& h : o.heralded) {
        if (h) {
            heralded.push_back({h->spectral_index, h->temporal_index});
        } else {
            heralded.push_back(nullptr);
        }
    }
    j["heralded"] = std::move(heralded);
    j["storage_duration_s"] = o.storage_duration_s;
    j["recall_success"] = o.recall_success;
    j["end_detection"] = o.end_detection;
    j["swap_success"] = o.swap_success;
    j["frequency_shift_hz"] = o.frequency_shift_hz;
    out << j.dump() << '\n';
}

void write_mc_summary_csv(std::ostream& out, const McEstimate& e) {
    out << "n_cycles,successes,frequency,stderr,analytic_P_s,z_score\n";
    out << e.n_cycles << ',' << e.successes << ',' << format_number(e.frequency) << ','
        << format_number(e.standard_error) << ',' << format_number(e.analytic_p) << ','
        << format_number(e.z_score) << '\n';
}

}  // namespace cppe
