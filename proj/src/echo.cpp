#include "cppe/echo.hpp"

#include <cmath>
#include <limits>

#include "cppe/error.hpp"

namespace cppe {

namespace {

struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
};

Range window_range(std::span<const double> t, double start, double end) {
    Range r;
    while (r.begin < t.size() && t[r.begin] < start) ++r.begin;
    r.end = r.begin;
    while (r.end < t.size() && t[r.end] < end) ++r.end;
    return r;
}

double crossing(double t0, double y0, double t1, double y1, double level) {
    if (y1 == y0) return 0.5 * (t0 + t1);
    return t0 + (level - y0) * (t1 - t0) / (y1 - y0);
}

}  // namespace

double window_energy(std::span<const double> t, std::span<const double> y, double start,
                     double end) {
    if (t.size() != y.size()) throw InvalidParameter("time and intensity lengths differ");
    const auto r = window_range(t, start, end);
    double e = 0.0;
    for (std::size_t k = r.begin; k + 1 < r.end; ++k) e += 0.5 * (y[k] + y[k + 1]) * (t[k + 1] - t[k]);
    return e;
}

EchoMetrics echo_metrics(std::span<const double> t, std::span<const double> y, double start,
                         double end, double reference_energy, double noise_floor) {
    if (t.size() != y.size()) throw InvalidParameter("time and intensity lengths differ");
    EchoMetrics m;
    const auto r = window_range(t, start, end);
    if (r.end <= r.begin) return m;
    m.energy = window_energy(t, y, start, end);
    if (reference_energy > 0.0) m.efficiency_proxy = m.energy / reference_energy;

    std::size_t peak = r.begin;
    double weight = 0.0;
    double moment = 0.0;
    for (std::size_t k = r.begin; k < r.end; ++k) {
        if (y[k] > y[peak]) peak = k;
        weight += y[k];
        moment += y[k] * t[k];
    }
    m.peak_intensity = y[peak];
    m.peak_time_s = t[peak];
    if (weight > 0.0) m.centroid_s = moment / weight;
    if (!(y[peak] > noise_floor) || y[peak] <= 0.0) return m;
    m.present = true;

    if (peak > r.begin && peak + 1 < r.end) {
        const double ym = y[peak - 1], y0 = y[peak], yp = y[peak + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) {
            const double shift = 0.5 * (ym - yp) / denom;
            const double h = t[peak + 1] - t[peak];
            m.peak_time_s = t[peak] + shift * h;
            m.peak_intensity = y0 - 0.25 * (ym - yp) * shift;
        }
    }
    const double half = 0.5 * y[peak];
    std::size_t lo = peak;
    while (lo > r.begin && y[lo - 1] >= half) --lo;
    std::size_t hi = peak;
    while (hi + 1 < r.end && y[hi + 1] >= half) ++hi;
    const double left = lo > r.begin ? crossing(t[lo - 1], y[lo - 1], t[lo], y[lo], half) : t[lo];
    const double right = hi + 1 < r.end ? crossing(t[hi], y[hi], t[hi + 1], y[hi + 1], half) : t[hi];
    m.fwhm_s = right - left;
    return m;
}

EchoMetrics echo_metrics(const EmissionTrace& trace, const TimeWindow& window,
                         double reference_energy, double noise_floor, int channel) {
    if (channel < 0) {
        return echo_metrics(trace.time_s, trace.intensity, window.start_s, window.end_s,
                            reference_energy, noise_floor);
    }
    const auto y = trace.channel_intensity(channel);
    return echo_metrics(trace.time_s, y, window.start_s, window.end_s, reference_energy,
                        noise_floor);
}

double expected_noise_counts(std::span<const double> excited, std::span<const double> weights,
                             double population_time_s, const MemoryModel& memory,
                             double start_s, double end_s) {
    memory.validate();
    if (excited.size() != weights.size()) throw InvalidParameter("population and weight lengths differ");
    if (end_s < start_s) throw InvalidParameter("noise window ends before it starts");
    if (start_s < population_time_s) throw InvalidParameter("noise window starts before the populations were taken");
    double residual = 0.0;
    for (std::size_t j = 0; j < excited.size(); ++j) residual += weights[j] * excited[j];
    const double t1 = memory.t1_s;
    const double a = start_s - population_time_s;
    const double b = end_s - population_time_s;
    const double exposure = t1 * (std::exp(-a / t1) - std::exp(-b / t1));
    return memory.noise_scale * residual * exposure;
}

double expected_noise_counts(const SequenceResult& result, const MemoryModel& memory,
                             double start_s, double end_s) {
    return expected_noise_counts(result.final_excited, result.atom_weight, result.population_time_s,
                                 memory, start_s, end_s);
}

SnrValue snr_ratio(double signal, double noise) {
    if (signal < 0.0 || noise < 0.0) throw InvalidParameter("counts must be >= 0");
    if (noise == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {signal / noise, false};
}

}  // namespace cppe
