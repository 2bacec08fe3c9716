#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "cppe/csv.hpp"
#include "cppe/echo.hpp"
#include "cppe/error.hpp"
#include "cppe/fit.hpp"
#include "cppe/histogram.hpp"
#include "cppe/presets.hpp"
#include "cppe/repeater_mc.hpp"
#include "cppe/sweep.hpp"

#ifndef CPPE_VERSION
#define CPPE_VERSION "unknown"
#endif

namespace cppe::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Files are written with a .partial suffix and renamed only once the whole command has
// succeeded, so a failed run never leaves a complete-looking output behind.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    OutputSet(OutputSet&& o) noexcept
        : dir_(std::move(o.dir_)), names_(std::move(o.names_)), committed_(o.committed_) {
        o.names_.clear();
    }
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    OutputSet& operator=(OutputSet&&) = delete;

    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& n : names_) fs::remove(dir_ / (n + ".partial"), ec);
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        fs::create_directories(dir_);
        const fs::path partial = dir_ / (name + ".partial");
        if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
        std::ofstream out(partial, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + partial.string());
        body(out);
        out.close();
        if (!out) throw std::runtime_error("write failed for " + partial.string());
    }

    void write_json(const std::string& name, const json& j) {
        write(name, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

    void commit() {
        for (const auto& n : names_) fs::rename(dir_ / (n + ".partial"), dir_ / n);
        committed_ = true;
    }

    const std::vector<std::string>& names() const { return names_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
    bool committed_ = false;
};

struct Run {
    Run(RunContext& c, OutputSet o) : ctx(c), out(std::move(o)) {}

    RunContext& ctx;
    OutputSet out;
    json summary = json::object();
    std::vector<std::string> warnings;
    std::optional<std::uint64_t> seed_used;
    bool seed_generated = false;

    const Config& cfg() const { return ctx.config; }

    std::uint64_t seed(const std::string& section) {
        if (!seed_used) {
            if (ctx.seed) {
                seed_used = ctx.seed;
            } else if (cfg().has(section, "seed")) {
                seed_used = static_cast<std::uint64_t>(cfg().get_int(section, "seed", 0));
            } else {
                std::random_device rd;
                seed_used = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
                seed_generated = true;
            }
        }
        return *seed_used;
    }
};

double num(double v) { return std::stod(format_number(v)); }

json number_or_null(double v) { return std::isfinite(v) ? json(num(v)) : json(nullptr); }

std::vector<double> linear_grid(double start, double stop, long long count) {
    if (count < 1) throw InvalidParameter("grid count must be >= 1");
    std::vector<double> g;
    for (long long k = 0; k < count; ++k) {
        g.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(k) / (count - 1));
    }
    return g;
}

std::vector<double> step_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw InvalidParameter("grid step must be > 0");
    std::vector<double> g;
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) g.push_back(start + static_cast<double>(k) * step);
    return g;
}

RepeaterParams repeater_params(const Config& c) {
    RepeaterParams p;
    p.rho = c.get_double("source", "rho", p.rho);
    p.nu_hz = c.get_double("source", "nu_hz", p.nu_hz);
    p.alpha_db_per_km = c.get_double("channel", "alpha_db_per_km", p.alpha_db_per_km);
    if (c.has("channel", "group_index")) {
        p.velocity_km_s = kSpeedOfLightKmPerS / c.get_double("channel", "group_index", kSmf28GroupIndex);
    }
    p.velocity_km_s = c.get_double("channel", "velocity_km_s", p.velocity_km_s);
    p.eta_d_i = c.get_double("detectors", "eta_d_i", p.eta_d_i);
    p.eta_d_s = c.get_double("detectors", "eta_d_s", p.eta_d_s);
    p.beta = static_cast<int>(c.get_int("detectors", "beta", p.beta));
    p.m_t = static_cast<int>(c.get_int("multiplexing", "m_t", p.m_t));
    p.m_s = static_cast<int>(c.get_int("multiplexing", "m_s", p.m_s));
    p.validate();
    return p;
}

MemoryModel memory_model(const Config& c) {
    MemoryModel m;
    m.eta_o = c.get_double("memory", "eta_o", m.eta_o);
    m.t2_s = c.get_double("memory", "t2_s", m.t2_s);
    m.t1_s = c.get_double("memory", "t1_s", m.t1_s);
    m.noise_scale = c.get_double("memory", "noise_scale", m.noise_scale);
    m.validate();
    return m;
}

SweepSpec sweep_spec(const Config& c, unsigned threads) {
    SweepSpec s;
    s.params = repeater_params(c);
    s.memory = memory_model(c);
    s.n_max = static_cast<int>(c.get_int("sweep", "n_max", s.n_max));
    s.heatmap_length_km = c.get_double("sweep", "heatmap_length_km", s.heatmap_length_km);
    s.nu_direct_hz = c.get_double("source", "nu_direct_hz", 0.0);
    s.threads = threads;
    return s;
}

json params_json(const RepeaterParams& p) {
    return {{"rho", num(p.rho)},
            {"alpha_db_per_km", num(p.alpha_db_per_km)},
            {"beta", p.beta},
            {"eta_d_i", num(p.eta_d_i)},
            {"eta_d_s", num(p.eta_d_s)},
            {"m_t", p.m_t},
            {"m_s", p.m_s},
            {"velocity_km_s", num(p.velocity_km_s)},
            {"nu_hz", num(p.nu_hz)}};
}

json memory_json(const MemoryModel& m) {
    return {{"eta_o", num(m.eta_o)}, {"t2_s", num(m.t2_s)}, {"t1_s", num(m.t1_s)},
            {"noise_scale", num(m.noise_scale)}};
}

void cmd_analytic(Run& run) {
    const Config& c = run.cfg();
    SweepSpec base = sweep_spec(c, run.ctx.threads);
    if (c.has("sweep", "lengths_km")) {
        base.lengths_km = c.get_doubles("sweep", "lengths_km", {});
    } else {
        base.lengths_km = step_grid(c.get_double("sweep", "length_start_km", 0.0),
                                    c.get_double("sweep", "length_stop_km", 1000.0),
                                    c.get_double("sweep", "length_step_km", 5.0));
    }
    if (base.lengths_km.empty()) throw InvalidParameter("sweep.lengths_km is empty");
    std::vector<double> m_s_values = {static_cast<double>(base.params.m_s)};
    if (c.has("multiplexing", "m_s_values") || !c.has("multiplexing", "m_s")) {
        m_s_values = c.get_doubles("multiplexing", "m_s_values", {3, 10, 100});
    }
    if (m_s_values.empty()) throw InvalidParameter("multiplexing.m_s_values is empty");

    json curves = json::array();
    for (double ms : m_s_values) {
        if (ms < 1 || ms != std::floor(ms)) throw InvalidParameter("spectral mode counts must be positive integers");
        SweepSpec spec = base;
        spec.params.m_s = static_cast<int>(ms);
        spec.params.validate();
        const auto rows = sweep_distance(spec);
        const long long m = spec.params.multimode_capacity();
        const std::string name = "distance_M" + std::to_string(m) + ".csv";
        run.out.write(name, [&](std::ostream& o) { write_distance_csv(o, rows); });
        json steps = json::array();
        for (const auto& r : rows) {
            if (r.n_links_stepped) steps.push_back({{"L_km", num(r.length_km)}, {"n_l_opt", r.n_links_opt}});
        }
        const double crossover = find_crossover_length(spec, rows);
        curves.push_back({{"file", name},
                          {"M", m},
                          {"m_s", spec.params.m_s},
                          {"crossover_km", crossover < 0.0 ? json(nullptr) : json(num(crossover))},
                          {"n_l_steps", steps}});
    }
    run.summary = {{"params", params_json(base.params)},
                   {"memory", memory_json(base.memory)},
                   {"n_max", base.n_max},
                   {"curves", curves}};
    run.out.write_json("analytic_summary.json", run.summary);
}

void cmd_heatmap(Run& run) {
    const Config& c = run.cfg();
    SweepSpec spec = sweep_spec(c, run.ctx.threads);
    std::vector<double> t2_ms;
    if (c.has("sweep", "t2_ms")) {
        t2_ms = c.get_doubles("sweep", "t2_ms", {});
    } else {
        t2_ms = linear_grid(c.get_double("sweep", "t2_start_ms", 0.1), c.get_double("sweep", "t2_stop_ms", 5.0),
                            c.get_int("sweep", "t2_count", 50));
    }
    for (double t : t2_ms) spec.t2_grid_s.push_back(t * 1e-3);
    if (c.has("sweep", "eta_o")) {
        spec.eta_o_grid = c.get_doubles("sweep", "eta_o", {});
    } else {
        spec.eta_o_grid = linear_grid(c.get_double("sweep", "eta_o_start", 0.02), c.get_double("sweep", "eta_o_stop", 1.0),
                                      c.get_int("sweep", "eta_o_count", 50));
    }
    if (spec.t2_grid_s.empty() || spec.eta_o_grid.empty()) throw InvalidParameter("heatmap grid is empty");
    auto cells = sweep_ratio_heatmap(spec);
    json markers = json::array();
    if (c.get_bool("sweep", "markers", true)) {
        const auto defs = default_heatmap_markers();
        const auto points = evaluate_heatmap_points(spec, defs);
        for (std::size_t k = 0; k < defs.size(); ++k) {
            cells.push_back(points[k]);
            markers.push_back({{"label", defs[k].label},
                               {"row", cells.size()},
                               {"T2_ms", num(points[k].t2_s * 1e3)},
                               {"eta_o", num(points[k].eta_o)},
                               {"ratio", num(points[k].ratio)},
                               {"n_l_opt", points[k].n_links_opt}});
        }
    }
    run.out.write("heatmap.csv", [&](std::ostream& o) { write_heatmap_csv(o, cells); });
    run.summary = {{"params", params_json(spec.params)},
                   {"L_km", num(spec.heatmap_length_km)},
                   {"grid_rows", spec.t2_grid_s.size() * spec.eta_o_grid.size()},
                   {"markers", markers}};
    run.out.write_json("heatmap_markers.json", run.summary);
}

void cmd_mc(Run& run) {
    const Config& c = run.cfg();
    const RepeaterParams params = repeater_params(c);
    const MemoryModel memory = memory_model(c);
    LinkConfig link;
    link.total_length_km = c.get_double("mc", "length_km", 100.0);
    link.n_links = static_cast<int>(c.get_int("mc", "n_links", 2));
    link.validate();
    const long long n = c.get_int("mc", "n_cycles", 1000000);
    if (n < 1) throw InvalidParameter("mc.n_cycles must be >= 1");
    McOptions opt;
    opt.channel_spacing_hz = c.get_double("mc", "channel_spacing_hz", opt.channel_spacing_hz);
    opt.reference_spectral_index = static_cast<int>(c.get_int("mc", "reference_spectral_index", 0));
    const std::string tie = c.get_string("mc", "tie_break", "lowest");
    if (tie == "lowest") {
        opt.tie_break = TieBreak::LowestIndex;
    } else if (tie == "highest") {
        opt.tie_break = TieBreak::HighestIndex;
    } else {
        throw InvalidParameter("mc.tie_break must be 'lowest' or 'highest'");
    }
    opt.threads = run.ctx.threads;
    const RngSpec rng{run.seed("mc"), 0};
    const auto est = estimate_success(params, memory, link, static_cast<std::uint64_t>(n), rng, opt);
    run.out.write("mc_summary.csv", [&](std::ostream& o) { write_mc_summary_csv(o, est); });

    json summary = {{"params", params_json(params)},
                    {"memory", memory_json(memory)},
                    {"L_km", num(link.total_length_km)},
                    {"n_links", link.n_links},
                    {"n_cycles", est.n_cycles},
                    {"successes", est.successes},
                    {"frequency", num(est.frequency)},
                    {"stderr", num(est.standard_error)},
                    {"analytic_P_s", num(est.analytic_p)},
                    {"z_score", num(est.z_score)},
                    {"link_heralds", est.link_heralds}};
    const long long keep = c.get_int("mc", "outcomes_limit", 1000);
    if (c.get_bool("mc", "outcomes", false) && keep > 0) {
        const auto count = static_cast<std::uint64_t>(std::min<long long>(keep, n));
        const auto outcomes = simulate_cycles(params, memory, link, count, rng, opt);
        run.out.write("outcomes.jsonl", [&](std::ostream& o) {
            for (std::uint64_t k = 0; k < outcomes.size(); ++k) write_outcome_jsonl(o, k, outcomes[k]);
        });
        const double threshold = c.get_double("mc", "efficiency_threshold", 0.01);
        const auto audit = storage_time_audit(outcomes, storage_budget_for_efficiency(memory, threshold));
        summary["storage_audit"] = {{"cycles", outcomes.size()},
                                    {"max_duration_s", num(audit.max_duration_s)},
                                    {"mean_duration_s", num(audit.mean_duration_s)},
                                    {"budget_s", number_or_null(audit.budget_s)},
                                    {"exceed_fraction", num(audit.exceed_fraction)}};
    }
    run.summary = summary;
    run.out.write_json("mc_summary.json", summary);
}

json chirp_json(const ChirpPulse& p) {
    return {{"a0_rad_s", num(p.a0_rad_s)},   {"tau_cp_s", num(p.tau_cp_s)},
            {"delta_hz", num(p.delta_hz)},   {"omega0_hz", num(p.omega0_hz)},
            {"t_start_s", num(p.t_start_s)}, {"adiabaticity", num(adiabaticity_factor(p))}};
}

json metrics_json(const EchoMetrics& m) {
    return {{"present", m.present},
            {"peak_time_s", num(m.peak_time_s)},
            {"centroid_s", num(m.centroid_s)},
            {"peak_intensity", num(m.peak_intensity)},
            {"energy", num(m.energy)},
            {"efficiency_proxy", num(m.efficiency_proxy)},
            {"fwhm_s", num(m.fwhm_s)}};
}

void cmd_pulse(Run& run) {
    const Config& c = run.cfg();
    BandwidthPreset preset = bandwidth_preset(static_cast<int>(c.get_int("pulse", "preset", 1)));
    preset.adiabaticity = c.get_double("pulse", "adiabaticity", preset.adiabaticity);
    preset.input_fwhm_s = c.get_double("pulse", "input_fwhm_s", preset.input_fwhm_s);
    preset.atom_count = static_cast<int>(c.get_int("pulse", "atom_count", preset.atom_count));
    preset.cell_width_hz = c.get_double("pulse", "cell_width_hz", preset.cell_width_hz);
    const double a0_scale = c.get_double("pulse", "a0_scale", 1.0);
    if (!(a0_scale >= 0.0)) throw InvalidParameter("pulse.a0_scale must be >= 0");

    MemoryModel memory = pulse_memory_defaults();
    memory.t2_s = c.get_double("pulse", "t2_s", memory.t2_s);
    memory.t1_s = c.get_double("pulse", "t1_s", memory.t1_s);
    memory.noise_scale = c.get_double("pulse", "noise_scale", memory.noise_scale);
    memory.validate();

    const std::string mode = c.get_string("pulse", "mode", "single");
    const double spacing_hz = c.get_double("pulse", "cell_spacing_hz", 4e6);
    const double mode_spacing = c.get_double("pulse", "mode_spacing_s", 4.0 * preset.input_fwhm_s);
    std::vector<MemoryCellSpec> cells;
    PulseSchedule schedule;
    if (mode == "single") {
        cells = {preset.cell()};
        schedule = preset_single_schedule(preset, c.get_double("pulse", "storage_time_s", 300e-6),
                                          c.get_double("pulse", "tau1_s", 10e-6));
    } else if (mode == "train") {
        cells = {preset.cell()};
        schedule = temporal_train_schedule(preset, static_cast<int>(c.get_int("pulse", "n_modes", 25)),
                                           mode_spacing, c.get_double("pulse", "storage_time_s", 800e-6));
    } else if (mode == "spectral") {
        const auto n_cells = c.get_int("pulse", "n_cells", 3);
        for (long long k = 0; k < n_cells; ++k) cells.push_back(preset.cell(k * spacing_hz));
        schedule = spectro_temporal_schedule(preset, cells, static_cast<int>(c.get_int("pulse", "n_modes", 20)),
                                             mode_spacing, c.get_double("pulse", "storage_time_s", 800e-6),
                                             static_cast<int>(c.get_int("pulse", "recall_cell", 0)));
    } else if (mode == "sequential") {
        const auto times = c.get_doubles("pulse", "storage_times_s",
                                         {reference::kSequentialTimes_s[0], reference::kSequentialTimes_s[1]});
        for (std::size_t k = 0; k < times.size(); ++k) cells.push_back(preset.cell(static_cast<double>(k) * spacing_hz));
        schedule = sequential_recall_schedule(preset, cells, static_cast<int>(c.get_int("pulse", "n_modes", 10)),
                                              mode_spacing, times);
    } else if (mode == "two_pulse") {
        cells = {preset.cell()};
        schedule.inputs.push_back(preset.input());
        schedule.hard_pulses.push_back({c.get_double("pulse", "tau12_s", 100e-6)});
    } else {
        throw InvalidParameter("pulse.mode must be single, train, spectral, sequential or two_pulse");
    }
    const double area = c.get_double("pulse", "input_area", schedule.inputs.empty() ? 0.1 : schedule.inputs.front().area);
    for (auto& in : schedule.inputs) in.area = area;
    for (auto& cp : schedule.controls) cp.pulse.a0_rad_s *= a0_scale;

    SequenceOptions opt;
    opt.output_dt_s = c.get_double("pulse", "output_dt_s", opt.output_dt_s);
    opt.step_refinement = c.get_double("pulse", "step_refinement", opt.step_refinement);
    opt.strict_timing = c.get_bool("pulse", "strict_timing", false);
    opt.subtract_background = c.get_bool("pulse", "subtract_background", false);
    opt.threads = run.ctx.threads;

    const double jitter = c.get_double("pulse", "jitter_sigma_hz", 0.0);
    SequenceResult result;
    json jitter_info = nullptr;
    if (jitter > 0.0) {
        const auto cycles = static_cast<int>(c.get_int("pulse", "jitter_cycles", 20));
        auto avg = run_jitter_average(schedule, cells, memory, opt, jitter, cycles, run.seed("pulse"), true);
        opt.recall_offset_hz = 0.0;
        result = run_sequence(schedule, cells, memory, opt);
        json widths = json::array();
        const auto echo_windows = result.trace.windows_of("echo");
        for (const auto& tr : avg.cycles) {
            widths.push_back(echo_windows.empty() ? 0.0 : num(echo_metrics(tr, echo_windows.front(), 0.0).fwhm_s));
        }
        jitter_info = {{"sigma_hz", num(jitter)}, {"cycles", cycles}, {"cycle_echo_fwhm_s", widths}};
        json offsets = json::array();
        for (double f : avg.offsets_hz) offsets.push_back(num(f));
        jitter_info["offsets_hz"] = offsets;
        result.trace = std::move(avg.mean);
    } else {
        result = run_sequence(schedule, cells, memory, opt);
    }
    for (const auto& w : result.warnings) run.warnings.push_back(w);

    const auto& trace = result.trace;
    const double floor_rel = c.get_double("pulse", "noise_floor_rel", 1e-4);
    const double signal_scale = c.get_double("pulse", "signal_scale", 1.0);
    json echoes = json::array();
    json primaries = json::array();
    json cp_echoes = json::array();
    for (const auto& w : trace.windows) {
        if (w.kind == "control") continue;
        double ref = 0.0;
        double floor = 0.0;
        if (w.input >= 0) {
            ref = result.reference_energy[static_cast<std::size_t>(w.input)];
            floor = floor_rel * ref / schedule.inputs[static_cast<std::size_t>(w.input)].fwhm_s;
        }
        const auto m = echo_metrics(trace, w, ref, floor, cells.size() > 1 ? w.cell : -1);
        json entry = {{"input", w.input}, {"cell", w.cell}, {"window_start_s", num(w.start_s)},
                      {"window_end_s", num(w.end_s)}, {"expected_center_s", num(w.center())}};
        entry.update(metrics_json(m));
        if (w.kind == "echo") {
            const double noise = w.start_s >= result.population_time_s
                                     ? expected_noise_counts(result, memory, w.start_s, w.end_s)
                                     : 0.0;
            const auto s = snr_ratio(signal_scale * m.energy, noise);
            entry["noise_counts"] = num(noise);
            entry["snr"] = s.infinite ? json(nullptr) : json(num(s.value));
            entry["snr_infinite"] = s.infinite;
            echoes.push_back(entry);
        } else if (w.kind == "primary") {
            primaries.push_back(entry);
        } else {
            cp_echoes.push_back(entry);
        }
    }

    run.out.write("trace.csv", [&](std::ostream& o) { write_trace_csv(o, trace); });
    json controls = json::array();
    for (const auto& cp : schedule.controls) {
        json p = chirp_json(cp.pulse);
        p["cell"] = cp.cell;
        p["role"] = cp.role == PulseRole::Store ? "store" : "recall";
        controls.push_back(p);
    }
    json inputs = json::array();
    for (const auto& in : schedule.inputs) {
        inputs.push_back({{"center_s", num(in.center_s)}, {"area", num(in.area)}, {"fwhm_s", num(in.fwhm_s)},
                          {"offset_hz", num(in.offset_hz)}});
    }
    json windows = json::array();
    for (const auto& w : trace.windows) {
        windows.push_back({{"kind", w.kind}, {"start_s", num(w.start_s)}, {"end_s", num(w.end_s)},
                           {"cell", w.cell}, {"input", w.input}});
    }
    json cell_list = json::array();
    for (const auto& cell : cells) {
        cell_list.push_back({{"center_hz", num(cell.center_hz)}, {"width_hz", num(cell.width_hz)},
                             {"atom_count", cell.atom_count}});
    }
    json meta = {{"preset", preset.name},
                 {"mode", mode},
                 {"memory", memory_json(memory)},
                 {"cells", cell_list},
                 {"inputs", inputs},
                 {"controls", controls},
                 {"hard_pulses", schedule.hard_pulses.size()},
                 {"windows", windows},
                 {"output_dt_s", num(opt.output_dt_s)},
                 {"warnings", result.warnings}};
    run.out.write_json("trace_meta.json", meta);
    run.summary = {{"mode", mode},
                   {"preset", preset.name},
                   {"storage_time_s", schedule.controls.size() >= 2
                                          ? json(num(storage_time(schedule.tau2_s, preset.tau_cp_s)))
                                          : json(nullptr)},
                   {"echoes", echoes},
                   {"primary_echoes", primaries},
                   {"cp_echoes", cp_echoes},
                   {"population_time_s", num(result.population_time_s)},
                   {"jitter", jitter_info},
                   {"warnings", result.warnings}};
    run.out.write_json("metrics.json", run.summary);
}

void cmd_fit(Run& run) {
    const Config& c = run.cfg();
    const std::string model_id = c.get_string("fit", "model", "");
    if (model_id.empty()) throw InvalidParameter("fit needs a model (--model or fit.model)");
    const DecayModel model = parse_decay_model(model_id);
    const std::string path = c.get_string("fit", "input", "");
    if (path.empty()) throw InvalidParameter("fit needs an input file (--input or fit.input)");
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open fit input '" + path + "'");
    const auto cols = read_two_column_csv(in);
    std::vector<FitPoint> pts;
    for (std::size_t k = 0; k < cols.x.size(); ++k) pts.push_back({cols.x[k], cols.y[k]});
    FitOptions opt;
    const double rel = c.get_double("fit", "sigma_rel", 0.0);
    if (rel > 0.0) {
        for (const auto& p : pts) opt.sigma.push_back(rel * std::abs(p.y));
    }
    opt.background = c.get_bool("fit", "background", false);
    const auto f = fit_decay(model, pts, opt);
    json params = json::object();
    for (const auto& p : f.params) {
        params[p.name] = {{"value", number_or_null(p.value)}, {"sigma", number_or_null(p.sigma)}};
    }
    run.summary = {{"model", decay_model_id(f.model)},
                   {"n_points", pts.size()},
                   {"parameters", params},
                   {"residual_norm", num(f.residual_norm)},
                   {"condition_number", number_or_null(f.condition_number)},
                   {"unbounded", f.unbounded},
                   {"poisson_weighted", f.poisson_weighted},
                   {"iterations", f.iterations}};
    run.out.write_json("fit_report.json", run.summary);
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const Config::Schema& config_schema() {
    static const Config::Schema schema = {
        {"source", {"rho", "nu_hz", "nu_direct_hz"}},
        {"channel", {"alpha_db_per_km", "group_index", "velocity_km_s"}},
        {"detectors", {"eta_d_i", "eta_d_s", "beta"}},
        {"memory", {"eta_o", "t2_s", "t1_s", "noise_scale"}},
        {"multiplexing", {"m_t", "m_s", "m_s_values"}},
        {"sweep",
         {"lengths_km", "length_start_km", "length_stop_km", "length_step_km", "n_max", "heatmap_length_km",
          "t2_ms", "t2_start_ms", "t2_stop_ms", "t2_count", "eta_o", "eta_o_start", "eta_o_stop",
          "eta_o_count", "markers"}},
        {"mc",
         {"n_cycles", "length_km", "n_links", "tie_break", "channel_spacing_hz", "reference_spectral_index",
          "outcomes", "outcomes_limit", "efficiency_threshold", "seed"}},
        {"pulse",
         {"preset", "mode", "storage_time_s", "storage_times_s", "tau1_s", "tau12_s", "adiabaticity",
          "a0_scale", "input_area", "input_fwhm_s", "atom_count", "cell_width_hz", "cell_spacing_hz",
          "n_cells", "n_modes", "mode_spacing_s", "recall_cell", "output_dt_s", "step_refinement",
          "jitter_sigma_hz", "jitter_cycles", "strict_timing", "subtract_background",
          "noise_floor_rel", "signal_scale", "t2_s", "t1_s", "noise_scale", "seed"}},
        {"fit", {"model", "input", "sigma_rel", "background"}},
    };
    return schema;
}

int run_command(const std::string& name, RunContext& ctx) {
    std::ostream& log = ctx.log ? *ctx.log : std::cerr;
    static const std::map<std::string, void (*)(Run&)> commands = {
        {"analytic", cmd_analytic}, {"heatmap", cmd_heatmap}, {"mc", cmd_mc},
        {"pulse", cmd_pulse},       {"fit", cmd_fit},
    };
    const auto it = commands.find(name);
    if (it == commands.end()) {
        log << "error: unknown subcommand '" << name << "'\n";
        return kExitUsage;
    }
    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();
    Run run{ctx, OutputSet(ctx.out_dir)};
    try {
        ctx.config.check_known(config_schema());
        it->second(run);
        for (const auto& w : run.warnings) log << "warning: " << w << '\n';

        std::vector<std::string> outputs = run.out.names();
        outputs.push_back("manifest.json");
        json manifest = {{"subcommand", name},
                         {"version", CPPE_VERSION},
                         {"config", ctx.config.to_json()},
                         {"seed", run.seed_used ? json(*run.seed_used) : json(nullptr)},
                         {"seed_generated", run.seed_generated},
                         {"outputs", outputs},
                         {"warnings", run.warnings}};
        run.out.write_json("manifest.json", manifest);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        run.out.write_json("run_info.json", {{"started_utc", started_utc},
                                             {"wall_clock_s", seconds},
                                             {"threads", ctx.threads}});
        run.out.commit();
        return kExitOk;
    } catch (const ParseError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidParameter& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigurationError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FitError& e) {
        log << "fit failure: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const UndefinedResult& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::ios_base::failure& e) {
        log << "i/o error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace cppe::cli
