#include "cppe/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "cppe/csv.hpp"
#include "cppe/error.hpp"
#include "cppe/parallel.hpp"

namespace cppe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kEmitChunk = 256;

int cell_of_frequency(const std::vector<MemoryCellSpec>& cells, double f) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (std::abs(f - cells[c].center_hz) <= 0.5 * cells[c].width_hz) return static_cast<int>(c);
    }
    return -1;
}

bool overlaps(const TimeWindow& a, const TimeWindow& b) {
    return a.start_s < b.end_s && b.start_s < a.end_s;
}

struct CpPair {
    int cell;
    std::size_t store;
    std::size_t recall;
};

std::vector<CpPair> pair_controls(const PulseSchedule& s) {
    std::vector<CpPair> pairs;
    for (std::size_t r = 0; r < s.controls.size(); ++r) {
        const auto& rec = s.controls[r];
        if (rec.role != PulseRole::Recall) continue;
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < s.controls.size(); ++k) {
            const auto& st = s.controls[k];
            if (st.role != PulseRole::Store || st.cell != rec.cell) continue;
            if (st.pulse.end() > rec.pulse.t_start_s) continue;
            if (!best || st.pulse.t_start_s > s.controls[*best].pulse.t_start_s) best = k;
        }
        if (best) pairs.push_back({rec.cell, *best, r});
    }
    return pairs;
}

void validate_schedule(const PulseSchedule& s, const std::vector<MemoryCellSpec>& cells) {
    for (const auto& c : s.controls) {
        c.pulse.validate();
        if (c.cell < 0 || c.cell >= static_cast<int>(cells.size())) {
            throw InvalidParameter("control pulse addresses a cell that does not exist");
        }
    }
    for (std::size_t i = 0; i < s.controls.size(); ++i) {
        for (std::size_t j = i + 1; j < s.controls.size(); ++j) {
            const auto& a = s.controls[i];
            const auto& b = s.controls[j];
            if (a.cell == b.cell && a.pulse.t_start_s < b.pulse.end() &&
                b.pulse.t_start_s < a.pulse.end()) {
                throw InvalidParameter("control pulses of one cell overlap in time");
            }
        }
    }
    for (const auto& in : s.inputs) {
        if (!(in.fwhm_s > 0.0)) throw InvalidParameter("input FWHM must be > 0");
        if (!(in.area >= 0.0)) throw InvalidParameter("input area must be >= 0");
    }
}

// Free-evolution samples of S(t) for grid indices [k0, k1) from the ensemble state at
// ens.time_s. Chunk boundaries are fixed in k so the reduction order never changes.
void emit_free(const AtomEnsemble& ens, const std::vector<double>& grid, std::size_t k0,
               std::size_t k1, double t2_s, unsigned threads,
               std::vector<std::vector<std::complex<double>>>& cell_out,
               std::vector<std::complex<double>>& total_out) {
    if (k1 <= k0) return;
    const std::size_t first_chunk = k0 / kEmitChunk;
    const std::size_t last_chunk = (k1 - 1) / kEmitChunk;
    const double t0 = ens.time_s;
    const int cells = ens.cell_count;
    parallel_for(last_chunk - first_chunk + 1, threads, [&](std::size_t ci) {
        const std::size_t chunk = first_chunk + ci;
        const std::size_t a = std::max(k0, chunk * kEmitChunk);
        const std::size_t b = std::min(k1, (chunk + 1) * kEmitChunk);
        const std::size_t len = b - a;
        std::vector<std::complex<double>> acc(static_cast<std::size_t>(cells) * len);
        const double dt = len > 1 ? grid[a + 1] - grid[a] : 0.0;
        for (std::size_t j = 0; j < ens.size(); ++j) {
            const auto c = ens.coherence[j];
            if (c == std::complex<double>{}) continue;
            const double omega = -2.0 * kPi * ens.detuning_hz[j];
            std::complex<double> z = ens.weight[j] * c * std::polar(1.0, omega * (grid[a] - t0));
            const std::complex<double> r = std::polar(1.0, omega * dt);
            std::complex<double>* row = acc.data() + static_cast<std::size_t>(ens.cell[j]) * len;
            for (std::size_t k = 0; k < len; ++k) {
                row[k] += z;
                z *= r;
            }
        }
        for (std::size_t k = 0; k < len; ++k) {
            const double damp = std::exp(-(grid[a + k] - t0) / t2_s);
            std::complex<double> sum{};
            for (int c = 0; c < cells; ++c) {
                const auto v = acc[static_cast<std::size_t>(c) * len + k] * damp;
                cell_out[c][a + k] = v;
                sum += v;
            }
            total_out[a + k] = sum;
        }
    });
}

void damp_only(AtomEnsemble& ens, double duration, double t2_s, double t1_s) {
    const double damp = std::exp(-duration / t2_s);
    const double relax = std::exp(-duration / t1_s);
    for (std::size_t j = 0; j < ens.size(); ++j) {
        ens.coherence[j] *= damp;
        ens.excited[j] *= relax;
    }
}

struct Event {
    enum class Kind { Input, Group, Hard } kind;
    double start = 0.0;
    double end = 0.0;
    std::size_t index = 0;           // input or hard pulse index
    std::vector<std::size_t> pulses; // group members
};

std::vector<Event> build_events(const PulseSchedule& s) {
    std::vector<Event> events;
    std::vector<std::size_t> order(s.controls.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.controls[a].pulse.t_start_s < s.controls[b].pulse.t_start_s;
    });
    for (std::size_t idx : order) {
        const auto& p = s.controls[idx].pulse;
        if (!events.empty() && events.back().kind == Event::Kind::Group &&
            p.t_start_s < events.back().end) {
            events.back().end = std::max(events.back().end, p.end());
            events.back().pulses.push_back(idx);
        } else {
            events.push_back({Event::Kind::Group, p.t_start_s, p.end(), 0, {idx}});
        }
    }
    const auto groups = events;
    auto inside_group = [&](double t) {
        return std::any_of(groups.begin(), groups.end(),
                           [t](const Event& g) { return t > g.start && t < g.end; });
    };
    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
        const double t = s.inputs[i].center_s;
        if (inside_group(t)) throw ConfigurationError("input pulse falls inside a control pulse");
        events.push_back({Event::Kind::Input, t, t, i, {}});
    }
    for (std::size_t i = 0; i < s.hard_pulses.size(); ++i) {
        const double t = s.hard_pulses[i].time_s;
        if (inside_group(t)) throw ConfigurationError("hard pulse falls inside a control pulse");
        events.push_back({Event::Kind::Hard, t, t, i, {}});
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.start < b.start; });
    return events;
}

double reference_energy(const AtomEnsemble& ens, const InputPulse& input, int cell,
                        double halfwidth_s, double dt) {
    const auto n = static_cast<std::size_t>(std::floor(2.0 * halfwidth_s / dt)) + 1;
    double energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = -halfwidth_s + static_cast<double>(k) * dt;
        std::complex<double> s{};
        for (std::size_t j = 0; j < ens.size(); ++j) {
            if (cell >= 0 && ens.cell[j] != cell) continue;
            const double w = 0.5 * input_spectral_weight(input, ens.detuning_hz[j] - input.offset_hz);
            s += ens.weight[j] * w * std::polar(1.0, -2.0 * kPi * ens.detuning_hz[j] * tau);
        }
        const double weight = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        energy += weight * std::norm(s) * dt;
    }
    return energy;
}

}  // namespace

double storage_time(double tau2_s, double tau_cp_s) { return 2.0 * (tau2_s + tau_cp_s); }

PulseSchedule single_cell_schedule(const InputPulse& input, const ChirpPulse& cp_template,
                                   double tau1_s, double tau2_s) {
    PulseSchedule s;
    InputPulse in = input;
    in.center_s = 0.0;
    s.inputs.push_back(in);
    ChirpPulse cp1 = cp_template;
    cp1.t_start_s = tau1_s;
    ChirpPulse cp2 = cp_template;
    cp2.t_start_s = cp1.end() + tau2_s;
    s.controls.push_back({cp1, 0, PulseRole::Store});
    s.controls.push_back({cp2, 0, PulseRole::Recall});
    s.tau1_s = tau1_s;
    s.tau2_s = tau2_s;
    return s;
}

std::vector<double> EmissionTrace::channel_intensity(int cell) const {
    std::vector<double> out(time_s.size(), 0.0);
    if (cell < 0 || cell >= static_cast<int>(cell_coherence.size())) return out;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(cell_coherence[cell][k]);
    return out;
}

std::vector<TimeWindow> EmissionTrace::windows_of(const std::string& kind) const {
    std::vector<TimeWindow> out;
    for (const auto& w : windows) {
        if (w.kind == kind) out.push_back(w);
    }
    return out;
}

std::vector<TimeWindow> annotate_windows(const PulseSchedule& s,
                                         const std::vector<MemoryCellSpec>& cells,
                                         double halfwidth_fwhm) {
    std::vector<TimeWindow> windows;
    const auto pairs = pair_controls(s);
    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
        const auto& in = s.inputs[i];
        const int cell = cell_of_frequency(cells, in.offset_hz);
        const double hw = halfwidth_fwhm * in.fwhm_s;
        for (const auto& c : s.controls) {
            if (c.role != PulseRole::Store || c.cell != cell || c.pulse.t_start_s < in.center_s) continue;
            const double t = 2.0 * c.pulse.center() - in.center_s;
            windows.push_back({"primary", t - hw, t + hw, cell, static_cast<int>(i)});
        }
        for (const auto& p : pairs) {
            if (p.cell != cell) continue;
            const auto& st = s.controls[p.store].pulse;
            if (st.t_start_s < in.center_s) continue;
            const double t = in.center_s + 2.0 * (s.controls[p.recall].pulse.center() - st.center());
            windows.push_back({"echo", t - hw, t + hw, cell, static_cast<int>(i)});
        }
        for (const auto& h : s.hard_pulses) {
            if (h.time_s <= in.center_s) continue;
            const double t = 2.0 * h.time_s - in.center_s;
            windows.push_back({"echo", t - hw, t + hw, cell, static_cast<int>(i)});
        }
    }
    for (const auto& p : pairs) {
        const auto& st = s.controls[p.store].pulse;
        const auto& rc = s.controls[p.recall].pulse;
        const double t = 2.0 * rc.center() - st.center();
        windows.push_back({"cp_echo", t - 0.5 * rc.tau_cp_s, t + 0.5 * rc.tau_cp_s, p.cell, -1});
    }
    for (const auto& c : s.controls) {
        windows.push_back({"control", c.pulse.t_start_s, c.pulse.end(), c.cell, -1});
    }
    return windows;
}

std::vector<std::string> check_schedule(const PulseSchedule& s,
                                        const std::vector<MemoryCellSpec>& cells) {
    validate_schedule(s, cells);
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
        if (s.inputs[i].area >= 0.3) {
            std::ostringstream msg;
            msg << "input " << i << " area " << s.inputs[i].area
                << " rad is outside the weak-excitation regime; linearization is inaccurate";
            warnings.push_back(msg.str());
        }
    }
    for (const auto& p : pair_controls(s)) {
        const auto& st = s.controls[p.store].pulse;
        const auto& rc = s.controls[p.recall].pulse;
        double last_input = -1e300;
        for (const auto& in : s.inputs) {
            if (cell_of_frequency(cells, in.offset_hz) == p.cell && in.center_s <= st.t_start_s) {
                last_input = std::max(last_input, in.center_s);
            }
        }
        if (last_input < -1e299) continue;
        const double tau1 = st.t_start_s - last_input;
        const double tau2 = rc.t_start_s - st.end();
        if (2.0 * tau1 >= tau2) {
            std::ostringstream msg;
            msg << "cell " << p.cell << ": 2*tau1 = " << 2.0 * tau1 * 1e6 << " us >= tau2 = "
                << tau2 * 1e6 << " us; the unsilenced primary echo can overlap the recall "
                << "(keep 2*tau1 < tau2)";
            warnings.push_back(msg.str());
        }
    }
    for (std::size_t a = 0; a < s.controls.size(); ++a) {
        for (std::size_t b = a + 1; b < s.controls.size(); ++b) {
            const auto& pa = s.controls[a];
            const auto& pb = s.controls[b];
            if (pa.cell == pb.cell || pa.pulse.end() <= pb.pulse.t_start_s || pb.pulse.end() <= pa.pulse.t_start_s) {
                continue;
            }
            std::ostringstream msg;
            msg << "control pulses of cells " << pa.cell << " and " << pb.cell
                << " overlap in time; the light shift each imprints on the other cell is not undone at recall";
            warnings.push_back(msg.str());
        }
    }
    const auto windows = annotate_windows(s, cells);
    for (const auto& w : windows) {
        if (w.kind != "echo") continue;
        for (const auto& c : windows) {
            if (c.kind == "control" && overlaps(w, c)) {
                std::ostringstream msg;
                msg << "echo window of input " << w.input << " overlaps a control pulse "
                    << "(keep 2*tau1 < tau2)";
                warnings.push_back(msg.str());
                break;
            }
        }
    }
    return warnings;
}

SequenceResult run_sequence(const PulseSchedule& s, const std::vector<MemoryCellSpec>& cells,
                            const MemoryModel& memory, const SequenceOptions& opt) {
    memory.validate();
    validate_cells(cells, cells.size() > 1 ? kDefaultMinCellSpacingHz : 0.0);
    if (!(opt.output_dt_s > 0.0)) throw InvalidParameter("output step must be > 0");
    if (!(opt.step_refinement >= 1.0)) throw InvalidParameter("step refinement must be >= 1");

    SequenceResult result;
    result.warnings = check_schedule(s, cells);
    if (opt.strict_timing && !result.warnings.empty()) {
        throw ConfigurationError(result.warnings.front());
    }
    for (const auto& c : s.controls) result.adiabaticity.push_back(adiabaticity_factor(c.pulse));

    auto& trace = result.trace;
    trace.windows = annotate_windows(s, cells, opt.window_halfwidth_fwhm);
    const auto events = build_events(s);

    double t_end = opt.output_end_s;
    if (t_end <= opt.output_start_s) {
        t_end = opt.output_start_s;
        for (const auto& w : trace.windows) t_end = std::max(t_end, w.end_s);
        for (const auto& e : events) t_end = std::max(t_end, e.end);
        t_end += 2e-6;
    }
    const auto n_out =
        static_cast<std::size_t>(std::floor((t_end - opt.output_start_s) / opt.output_dt_s + 1e-9)) + 1;
    trace.time_s.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        trace.time_s[k] = opt.output_start_s + static_cast<double>(k) * opt.output_dt_s;
    }
    trace.coherence.assign(n_out, {});
    trace.cell_coherence.assign(cells.size(), std::vector<std::complex<double>>(n_out));

    double t_begin = opt.output_start_s;
    if (!events.empty()) t_begin = std::min(t_begin, events.front().start);
    AtomEnsemble ens = make_ensemble(cells, t_begin);

    for (std::size_t i = 0; i < s.inputs.size(); ++i) {
        const auto& in = s.inputs[i];
        result.reference_energy.push_back(reference_energy(
            ens, in, cell_of_frequency(cells, in.offset_hz),
            opt.window_halfwidth_fwhm * in.fwhm_s, opt.output_dt_s));
    }

    auto grid_index = [&](double t) {
        // First grid index with time >= t.
        return static_cast<std::size_t>(
            std::lower_bound(trace.time_s.begin(), trace.time_s.end(), t) - trace.time_s.begin());
    };
    auto emit_until = [&](double t) {
        emit_free(ens, trace.time_s, grid_index(ens.time_s), grid_index(t), memory.t2_s,
                  opt.threads, trace.cell_coherence, trace.coherence);
    };

    result.population_time_s = t_begin;
    bool population_snapshot = false;
    for (const auto& ev : events) {
        emit_until(ev.start);
        switch (ev.kind) {
            case Event::Kind::Input:
                imprint_input(ens, s.inputs[ev.index], memory.t2_s, memory.t1_s);
                break;
            case Event::Kind::Hard: {
                free_evolve(ens, ev.start, memory.t2_s, memory.t1_s);
                const auto& h = s.hard_pulses[ev.index];
                apply_propagators(ens, std::vector<Su2>(ens.size(), hard_rotation(h.area_rad, h.phase_rad)));
                break;
            }
            case Event::Kind::Group: {
                free_evolve(ens, ev.start, memory.t2_s, memory.t1_s);
                std::vector<ChirpPulse> pulses;
                for (std::size_t idx : ev.pulses) {
                    ChirpPulse p = s.controls[idx].pulse;
                    if (s.controls[idx].role == PulseRole::Recall) p.omega0_hz += opt.recall_offset_hz;
                    pulses.push_back(p);
                }
                const DriveFunction drive = [&pulses](double t) {
                    std::complex<double> sum{};
                    for (const auto& p : pulses) sum += chirp_waveform(p, t);
                    return sum;
                };
                std::vector<Su2> props(ens.size());
                for (int c = 0; c < ens.cell_count; ++c) {
                    std::vector<std::size_t> atoms;
                    double bound = std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < ens.size(); ++j) {
                        if (ens.cell[j] != c) continue;
                        atoms.push_back(j);
                        for (const auto& p : pulses) {
                            bound = std::min(bound, max_step_for(p, ens.detuning_hz[j]));
                        }
                    }
                    double dt = bound / opt.step_refinement;
                    if (opt.fixed_dt_s > 0.0) {
                        if (opt.fixed_dt_s > bound * (1.0 + 1e-12)) {
                            throw ConfigurationError("fixed integrator step does not resolve the control pulses");
                        }
                        dt = opt.fixed_dt_s;
                    }
                    const DriveSamples samples = sample_drive(drive, ev.start, ev.end, dt);
                    parallel_for(atoms.size(), opt.threads, [&](std::size_t a) {
                        const std::size_t j = atoms[a];
                        props[j] = magnus_propagator(samples, ens.detuning_hz[j]);
                    });
                }
                const double duration = ev.end - ev.start;
                damp_only(ens, 0.5 * duration, memory.t2_s, memory.t1_s);
                apply_propagators(ens, props);
                damp_only(ens, 0.5 * duration, memory.t2_s, memory.t1_s);
                ens.time_s = ev.end;
                result.final_excited = ens.excited;
                result.population_time_s = ev.end;
                population_snapshot = true;
                break;
            }
        }
    }
    emit_until(trace.time_s.back() + 0.5 * opt.output_dt_s);
    if (!population_snapshot) {
        result.final_excited = ens.excited;
        result.population_time_s = ens.time_s;
    }
    result.atom_weight = ens.weight;
    result.atom_cell = ens.cell;

    if (opt.subtract_background) {
        PulseSchedule dark = s;
        for (auto& in : dark.inputs) in.area = 0.0;
        SequenceOptions dark_opt = opt;
        dark_opt.subtract_background = false;
        dark_opt.output_end_s = trace.time_s.back();
        const auto bg = run_sequence(dark, cells, memory, dark_opt).trace;
        for (std::size_t k = 0; k < n_out; ++k) {
            trace.coherence[k] -= bg.coherence[k];
            for (std::size_t c = 0; c < cells.size(); ++c) trace.cell_coherence[c][k] -= bg.cell_coherence[c][k];
        }
    }
    trace.intensity.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) trace.intensity[k] = std::norm(trace.coherence[k]);
    return result;
}

JitterAverage run_jitter_average(const PulseSchedule& s, const std::vector<MemoryCellSpec>& cells,
                                 const MemoryModel& memory, const SequenceOptions& options,
                                 double sigma_hz, int n_cycles, std::uint64_t seed,
                                 bool keep_cycles) {
    if (n_cycles < 1) throw InvalidParameter("jitter average needs at least one cycle");
    if (!(sigma_hz >= 0.0)) throw InvalidParameter("jitter sigma must be >= 0");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> offset(0.0, 1.0);
    JitterAverage avg;
    for (int c = 0; c < n_cycles; ++c) {
        const double df = sigma_hz * offset(engine);
        avg.offsets_hz.push_back(df);
        SequenceOptions opt = options;
        opt.recall_offset_hz = options.recall_offset_hz + df;
        SequenceResult r = run_sequence(s, cells, memory, opt);
        auto& tr = r.trace;
        if (c == 0) {
            avg.mean = tr;
        } else {
            for (std::size_t k = 0; k < tr.time_s.size(); ++k) {
                avg.mean.intensity[k] += tr.intensity[k];
                avg.mean.coherence[k] += tr.coherence[k];
                for (std::size_t cell = 0; cell < tr.cell_coherence.size(); ++cell) {
                    avg.mean.cell_coherence[cell][k] += tr.cell_coherence[cell][k];
                }
            }
        }
        if (keep_cycles) avg.cycles.push_back(std::move(tr));
    }
    const double inv = 1.0 / n_cycles;
    for (std::size_t k = 0; k < avg.mean.time_s.size(); ++k) {
        avg.mean.intensity[k] *= inv;
        avg.mean.coherence[k] *= inv;
        for (auto& cc : avg.mean.cell_coherence) cc[k] *= inv;
    }
    return avg;
}

void write_trace_csv(std::ostream& out, const EmissionTrace& trace) {
    out << "t_s,intensity,re_S,im_S\n";
    for (std::size_t k = 0; k < trace.time_s.size(); ++k) {
        out << format_number(trace.time_s[k]) << ',' << format_number(trace.intensity[k]) << ','
            << format_number(trace.coherence[k].real()) << ','
            << format_number(trace.coherence[k].imag()) << '\n';
    }
}

}  // namespace cppe
