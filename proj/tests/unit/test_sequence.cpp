#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cppe/echo.hpp"
#include "cppe/error.hpp"
#include "cppe/presets.hpp"
#include "cppe/sequence.hpp"

using namespace cppe;

namespace {

MemoryModel lossless() {
    MemoryModel m;
    m.eta_o = 1.0;
    m.t2_s = 1e300;
    m.t1_s = 1e300;
    return m;
}

struct Run {
    PulseSchedule schedule;
    std::vector<MemoryCellSpec> cells;
    SequenceResult result;
};

Run run_preset(int index, double tau1, double tau2, const MemoryModel& memory = lossless(),
               SequenceOptions opt = {}) {
    const auto& p = bandwidth_preset(index);
    Run r;
    r.schedule = single_cell_schedule(p.input(), p.control(), tau1, tau2);
    r.cells = {p.cell()};
    r.result = run_sequence(r.schedule, r.cells, memory, opt);
    return r;
}

EchoMetrics echo_of(const Run& r) {
    const auto w = r.result.trace.windows_of("echo").at(0);
    return echo_metrics(r.result.trace, w, r.result.reference_energy.at(0));
}

double coherent_difference_energy(const EmissionTrace& a, const EmissionTrace& b, const TimeWindow& w) {
    std::vector<double> diff(a.time_s.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::norm(a.coherence[i] - b.coherence[i]);
    return window_energy(a.time_s, diff, w.start_s, w.end_s);
}

}  // namespace

TEST(Schedule, StorageTimeAndPlacement) {
    EXPECT_DOUBLE_EQ(storage_time(120e-6, 30e-6), 300e-6);
    const auto& p = bandwidth_preset(1);
    const auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 120e-6);
    ASSERT_EQ(s.controls.size(), 2u);
    EXPECT_DOUBLE_EQ(s.controls[0].pulse.t_start_s, 10e-6);
    EXPECT_DOUBLE_EQ(s.controls[1].pulse.t_start_s, 10e-6 + 30e-6 + 120e-6);
    EXPECT_EQ(s.controls[1].role, PulseRole::Recall);
}

TEST(Schedule, EchoWindowAtStorageTime) {
    const auto& p = bandwidth_preset(1);
    const auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 120e-6);
    const auto windows = annotate_windows(s, {p.cell()});
    int echoes = 0;
    for (const auto& w : windows) {
        if (w.kind != "echo") continue;
        ++echoes;
        EXPECT_NEAR(w.center(), 300e-6, 1e-12);
        EXPECT_NEAR(w.end_s - w.start_s, 4 * p.input_fwhm_s, 1e-15);
    }
    EXPECT_EQ(echoes, 1);
}

TEST(Schedule, TimingWarnings) {
    const auto& p = bandwidth_preset(1);
    EXPECT_TRUE(check_schedule(single_cell_schedule(p.input(), p.control(), 10e-6, 120e-6), {p.cell()}).empty());
    const auto bad = single_cell_schedule(p.input(), p.control(), 70e-6, 120e-6);
    const auto w = check_schedule(bad, {p.cell()});
    ASSERT_FALSE(w.empty());
    EXPECT_NE(w.front().find("2*tau1"), std::string::npos);
    InputPulse strong = p.input();
    strong.area = 0.5;
    EXPECT_FALSE(check_schedule(single_cell_schedule(strong, p.control(), 10e-6, 120e-6), {p.cell()}).empty());
}

TEST(Schedule, StrictTimingTurnsWarningIntoError) {
    SequenceOptions opt;
    opt.strict_timing = true;
    EXPECT_THROW(run_preset(1, 70e-6, 120e-6, lossless(), opt), ConfigurationError);
}

TEST(Schedule, OverlappingControlsRejected) {
    const auto& p = bandwidth_preset(1);
    auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 120e-6);
    s.controls[1].pulse.t_start_s = s.controls[0].pulse.t_start_s + 10e-6;
    EXPECT_THROW(run_sequence(s, {p.cell()}, lossless()), InvalidParameter);
}

TEST(Schedule, InputInsideControlRejected) {
    const auto& p = bandwidth_preset(1);
    auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 120e-6);
    s.inputs.push_back(p.input(s.controls[0].pulse.center()));
    EXPECT_THROW(run_sequence(s, {p.cell()}, lossless()), ConfigurationError);
}

TEST(Sequence, EchoPeaksAtStorageTime) {
    const auto r = run_preset(1, 10e-6, 120e-6);
    const auto m = echo_of(r);
    ASSERT_TRUE(m.present);
    EXPECT_NEAR(m.peak_time_s, 300e-6, 0.1 * bandwidth_preset(1).input_fwhm_s);
    EXPECT_GT(m.efficiency_proxy, 0.5);
}

TEST(Sequence, ThreadCountDoesNotChangeTrace) {
    SequenceOptions a;
    a.threads = 1;
    SequenceOptions b;
    b.threads = 3;
    const auto r1 = run_preset(1, 10e-6, 60e-6, lossless(), a);
    const auto r2 = run_preset(1, 10e-6, 60e-6, lossless(), b);
    EXPECT_EQ(r1.result.trace.intensity, r2.result.trace.intensity);
    EXPECT_EQ(r1.result.final_excited, r2.result.final_excited);
}

TEST(Sequence, EchoIsQuadraticInInputArea) {
    const auto& p = bandwidth_preset(1);
    auto run_area = [&](double area) {
        InputPulse in = p.input();
        in.area = area;
        return run_sequence(single_cell_schedule(in, p.control(), 10e-6, 60e-6), {p.cell()}, lossless());
    };
    const auto r0 = run_area(0.0);
    const auto r1 = run_area(0.05);
    const auto r2 = run_area(0.1);
    const auto w = r1.trace.windows_of("echo").at(0);
    const double e1 = coherent_difference_energy(r1.trace, r0.trace, w);
    const double e2 = coherent_difference_energy(r2.trace, r0.trace, w);
    EXPECT_NEAR(e2 / e1, 4.0, 0.04);
}

TEST(Sequence, NoControlAmplitudeMeansNoEcho) {
    const auto& p = bandwidth_preset(1);
    auto cp = p.control();
    cp.a0_rad_s = 0.0;
    const auto s = single_cell_schedule(p.input(), cp, 10e-6, 120e-6);
    const auto r = run_sequence(s, {p.cell()}, lossless());
    const double ref = r.reference_energy.at(0);
    const auto m = echo_metrics(r.trace, r.trace.windows_of("echo").at(0), ref, 1e-6 * ref / p.input_fwhm_s);
    EXPECT_FALSE(m.present);
    EXPECT_LT(m.efficiency_proxy, 1e-6);
}

TEST(Sequence, EfficiencyFallsWithStorageTime) {
    MemoryModel mem = pulse_memory_defaults();
    const auto short_run = run_preset(1, 10e-6, tau2_for_storage(300e-6, 30e-6), mem);
    const auto long_run = run_preset(1, 10e-6, tau2_for_storage(600e-6, 30e-6), mem);
    const double e1 = echo_of(short_run).efficiency_proxy;
    const double e2 = echo_of(long_run).efficiency_proxy;
    EXPECT_GT(e1, e2);
    // Coherence damping over the storage time scales the echo intensity by exp(-2 dT / T2).
    EXPECT_NEAR(e2 / e1, std::exp(-2.0 * 300e-6 / mem.t2_s), 0.02);
}

TEST(Sequence, TwoPulseEchoDecaysWithFourTauOverT2) {
    MemoryModel mem = lossless();
    mem.t2_s = 400e-6;
    MemoryCellSpec cell;
    cell.width_hz = 1.8e6;
    cell.atom_count = 4001;
    auto energy_at = [&](double tau) {
        PulseSchedule s;
        s.inputs.push_back(InputPulse{});
        s.hard_pulses.push_back(HardPulse{tau});
        const auto r = run_sequence(s, {cell}, mem);
        return echo_metrics(r.trace, r.trace.windows_of("echo").at(0), r.reference_energy.at(0));
    };
    const auto a = energy_at(50e-6);
    const auto b = energy_at(150e-6);
    ASSERT_TRUE(a.present);
    EXPECT_NEAR(a.peak_time_s, 100e-6, 0.05e-6);
    EXPECT_NEAR(b.peak_time_s, 300e-6, 0.05e-6);
    EXPECT_NEAR(b.energy / a.energy, std::exp(-4.0 * 100e-6 / mem.t2_s), 1e-3);
}

TEST(Sequence, RecallJitterLowersAveragedEcho) {
    const auto& p = bandwidth_preset(1);
    const auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 60e-6);
    SequenceOptions opt;
    const auto clean = run_jitter_average(s, {p.cell()}, lossless(), opt, 0.0, 1, 1);
    const auto noisy = run_jitter_average(s, {p.cell()}, lossless(), opt, 0.3e6, 4, 11);
    const auto again = run_jitter_average(s, {p.cell()}, lossless(), opt, 0.3e6, 4, 11);
    EXPECT_EQ(noisy.mean.intensity, again.mean.intensity);
    EXPECT_EQ(noisy.offsets_hz.size(), 4u);
    const auto w = clean.mean.windows_of("echo").at(0);
    const double e0 = window_energy(clean.mean.time_s, clean.mean.intensity, w.start_s, w.end_s);
    const double e1 = window_energy(noisy.mean.time_s, noisy.mean.intensity, w.start_s, w.end_s);
    EXPECT_LT(e1, e0);
}

TEST(Sequence, ControlWindowsAreGated) {
    const auto r = run_preset(1, 10e-6, 60e-6);
    for (const auto& w : r.result.trace.windows_of("control")) {
        for (std::size_t i = 0; i < r.result.trace.time_s.size(); ++i) {
            if (w.contains(r.result.trace.time_s[i])) EXPECT_EQ(r.result.trace.intensity[i], 0.0);
        }
    }
}

TEST(TraceCsv, HeaderAndRows) {
    EmissionTrace t;
    t.time_s = {0.0, 1e-6};
    t.coherence = {{1.0, 0.0}, {0.0, 2.0}};
    t.intensity = {1.0, 4.0};
    std::ostringstream out;
    write_trace_csv(out, t);
    EXPECT_EQ(out.str(), "t_s,intensity,re_S,im_S\n0,1,1,0\n1e-06,4,0,2\n");
}

TEST(Sequence, BackgroundSubtractionRemovesInputFreeEmission) {
    const auto& p = bandwidth_preset(1);
    auto s = single_cell_schedule(p.input(), p.control(), 10e-6, 60e-6);
    s.inputs[0].area = 0.0;
    SequenceOptions opt;
    opt.subtract_background = true;
    const auto r = run_sequence(s, {p.cell()}, lossless(), opt);
    for (double v : r.trace.intensity) EXPECT_EQ(v, 0.0);
}

TEST(Schedule, CrossCellOverlapWarns) {
    const auto& p = bandwidth_preset(1);
    const auto cells = preset_cells(p, {0.0, 4e6});
    PulseSchedule s;
    s.inputs.push_back(p.input());
    s.controls.push_back({p.control(0.0, 10e-6), 0, PulseRole::Store});
    s.controls.push_back({p.control(4e6, 20e-6), 1, PulseRole::Store});
    bool found = false;
    for (const auto& w : check_schedule(s, cells)) found = found || w.find("cells 0 and 1") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(Schedule, SequentialRecallKeepsEchoesClearOfControls) {
    const auto& p = bandwidth_preset(1);
    const auto cells = preset_cells(p, {0.0, 4e6});
    const auto s = sequential_recall_schedule(p, cells, 3, 4 * p.input_fwhm_s, {450e-6, 850e-6});
    EXPECT_TRUE(check_schedule(s, cells).empty());
    for (const auto& w : annotate_windows(s, cells)) {
        if (w.kind != "echo") continue;
        const double expected = w.cell == 0 ? 450e-6 : 850e-6;
        EXPECT_NEAR(w.center() - s.inputs[static_cast<std::size_t>(w.input)].center_s, expected, 1e-12);
    }
}
