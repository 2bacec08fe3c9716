#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "commands.hpp"
#include "cppe/echo.hpp"
#include "cppe/error.hpp"
#include "cppe/fit.hpp"
#include "cppe/presets.hpp"
#include "cppe/repeater_mc.hpp"
#include "cppe/repeater_model.hpp"
#include "cppe/sweep.hpp"

namespace py = pybind11;
using namespace cppe;

namespace {

py::dict pulse_run(int preset_index, double storage_time_s, double tau1_s, const MemoryModel& memory,
                   bool subtract_background, unsigned threads) {
    const auto& preset = bandwidth_preset(preset_index);
    const auto schedule = preset_single_schedule(preset, storage_time_s, tau1_s);
    SequenceOptions opt;
    opt.subtract_background = subtract_background;
    opt.threads = threads;
    SequenceResult r;
    {
        py::gil_scoped_release release;
        r = run_sequence(schedule, {preset.cell()}, memory, opt);
    }
    const auto w = r.trace.windows_of("echo").at(0);
    const auto m = echo_metrics(r.trace, w, r.reference_energy.at(0));
    py::dict echo;
    echo["present"] = m.present;
    echo["peak_time_s"] = m.peak_time_s;
    echo["energy"] = m.energy;
    echo["efficiency_proxy"] = m.efficiency_proxy;
    echo["fwhm_s"] = m.fwhm_s;
    echo["noise_counts"] = expected_noise_counts(r, memory, w.start_s, w.end_s);
    py::dict out;
    out["time_s"] = r.trace.time_s;
    out["intensity"] = r.trace.intensity;
    out["echo"] = echo;
    out["warnings"] = r.warnings;
    return out;
}

py::dict fit(const std::string& model, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<double>& sigma, bool background) {
    if (x.size() != y.size()) throw InvalidParameter("x and y differ in length");
    std::vector<FitPoint> pts;
    for (std::size_t k = 0; k < x.size(); ++k) pts.push_back({x[k], y[k]});
    FitOptions opt;
    opt.sigma = sigma;
    opt.background = background;
    const auto f = fit_decay(parse_decay_model(model), pts, opt);
    py::dict params;
    for (const auto& p : f.params) params[py::str(p.name)] = py::make_tuple(p.value, p.sigma);
    py::dict out;
    out["model"] = decay_model_id(f.model);
    out["params"] = params;
    out["unbounded"] = f.unbounded;
    out["poisson_weighted"] = f.poisson_weighted;
    out["residual_norm"] = f.residual_norm;
    return out;
}

std::pair<int, std::string> run_cli(const std::string& name, const std::vector<std::string>& overrides,
                                    const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed,
                                    unsigned threads) {
    cli::RunContext ctx;
    for (const auto& o : overrides) ctx.config.set_override(o);
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    ctx.threads = threads;
    std::ostringstream log;
    ctx.log = &log;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cli::run_command(name, ctx);
    }
    return {code, log.str()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiplexed quantum repeater model and chirped-pulse memory simulator.";

    py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
    py::register_exception<UndefinedResult>(m, "UndefinedResult", PyExc_ArithmeticError);

    py::class_<RepeaterParams>(m, "RepeaterParams")
        .def(py::init<>())
        .def_readwrite("rho", &RepeaterParams::rho)
        .def_readwrite("alpha_db_per_km", &RepeaterParams::alpha_db_per_km)
        .def_readwrite("beta", &RepeaterParams::beta)
        .def_readwrite("eta_d_i", &RepeaterParams::eta_d_i)
        .def_readwrite("eta_d_s", &RepeaterParams::eta_d_s)
        .def_readwrite("m_t", &RepeaterParams::m_t)
        .def_readwrite("m_s", &RepeaterParams::m_s)
        .def_readwrite("velocity_km_s", &RepeaterParams::velocity_km_s)
        .def_readwrite("nu_hz", &RepeaterParams::nu_hz);

    py::class_<MemoryModel>(m, "MemoryModel")
        .def(py::init<>())
        .def_readwrite("eta_o", &MemoryModel::eta_o)
        .def_readwrite("t2_s", &MemoryModel::t2_s)
        .def_readwrite("t1_s", &MemoryModel::t1_s)
        .def_readwrite("noise_scale", &MemoryModel::noise_scale);

    m.def("pulse_memory_defaults", &pulse_memory_defaults);

    m.def("success_probability", [](const RepeaterParams& p, const MemoryModel& mem, double length_km, int n_links) {
        return success_probability(p, mem, LinkConfig{length_km, n_links});
    }, py::arg("params"), py::arg("memory"), py::arg("length_km"), py::arg("n_links"));
    m.def("link_herald_probability", [](const RepeaterParams& p, double length_km, int n_links) {
        return link_herald_probability(p, LinkConfig{length_km, n_links});
    }, py::arg("params"), py::arg("length_km"), py::arg("n_links"));
    m.def("direct_transmission_probability", &direct_transmission_probability,
          py::arg("params"), py::arg("length_km"));
    m.def("memory_efficiency", &memory_efficiency, py::arg("memory"), py::arg("storage_time_s"));
    m.def("optimize_links", [](const RepeaterParams& p, const MemoryModel& mem, double length_km, int n_max) {
        const auto o = optimize_links(p, mem, length_km, n_max);
        return py::make_tuple(o.n_links, o.success_probability, o.storage_time_s);
    }, py::arg("params"), py::arg("memory"), py::arg("length_km"), py::arg("n_max") = 64);

    m.def("sweep_distance", [](const std::vector<double>& lengths_km, const RepeaterParams& p,
                               const MemoryModel& mem, int n_max) {
        SweepSpec spec;
        spec.params = p;
        spec.memory = mem;
        spec.lengths_km = lengths_km;
        spec.n_max = n_max;
        const auto rows = sweep_distance(spec);
        py::dict out;
        std::vector<double> ratio, ts, pr, pd;
        std::vector<int> n;
        for (const auto& r : rows) {
            ratio.push_back(r.ratio);
            ts.push_back(r.storage_time_s);
            pr.push_back(r.p_repeater);
            pd.push_back(r.p_direct);
            n.push_back(r.n_links_opt);
        }
        out["length_km"] = lengths_km;
        out["n_links_opt"] = n;
        out["storage_time_s"] = ts;
        out["p_repeater"] = pr;
        out["p_direct"] = pd;
        out["ratio"] = ratio;
        out["crossover_km"] = find_crossover_length(spec, rows);
        return out;
    }, py::arg("lengths_km"), py::arg("params") = RepeaterParams{}, py::arg("memory") = MemoryModel{},
       py::arg("n_max") = 64);

    m.def("estimate_success", [](const RepeaterParams& p, const MemoryModel& mem, double length_km, int n_links,
                                 std::uint64_t n_cycles, std::uint64_t seed, unsigned threads) {
        McOptions opt;
        opt.threads = threads;
        McEstimate e;
        {
            py::gil_scoped_release release;
            e = estimate_success(p, mem, LinkConfig{length_km, n_links}, n_cycles, {seed, 0}, opt);
        }
        py::dict out;
        out["n_cycles"] = e.n_cycles;
        out["successes"] = e.successes;
        out["frequency"] = e.frequency;
        out["standard_error"] = e.standard_error;
        out["analytic_p"] = e.analytic_p;
        out["z_score"] = e.z_score;
        return out;
    }, py::arg("params"), py::arg("memory"), py::arg("length_km"), py::arg("n_links"), py::arg("n_cycles"),
       py::arg("seed"), py::arg("threads") = 1);

    m.def("inversion_profile", [](int preset, const std::vector<double>& detunings_hz, double refinement) {
        return inversion_profile(bandwidth_preset(preset).control(), detunings_hz, 0.0, refinement);
    }, py::arg("preset"), py::arg("detunings_hz"), py::arg("refinement") = 1.0);

    m.def("run_pulse", &pulse_run, py::arg("preset") = 1, py::arg("storage_time_s") = 300e-6,
          py::arg("tau1_s") = 10e-6, py::arg("memory") = pulse_memory_defaults(),
          py::arg("subtract_background") = false, py::arg("threads") = 1);

    m.def("fit", &fit, py::arg("model"), py::arg("x"), py::arg("y"), py::arg("sigma") = std::vector<double>{},
          py::arg("background") = false);

    m.def("run_command", &run_cli, py::arg("name"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("out_dir") = std::filesystem::path("."), py::arg("seed") = std::nullopt,
          py::arg("threads") = 1);
}
