#include "cppe/histogram.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "cppe/error.hpp"

namespace cppe {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, int line) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ParseError("not a number: '" + t + "'", line);
    }
    return v;
}

}  // namespace

void CountHistogram::validate() const {
    if (edges_s.size() != counts.size() + 1) throw InvalidParameter("histogram needs bins + 1 edges");
    for (std::size_t k = 1; k < edges_s.size(); ++k) {
        if (!(edges_s[k] > edges_s[k - 1])) throw InvalidParameter("histogram edges must increase");
    }
    for (auto c : counts) {
        if (c < 0) throw InvalidParameter("histogram counts must be >= 0");
    }
    if (cycles < 1) throw InvalidParameter("histogram cycle count must be >= 1");
    for (const auto& w : windows) {
        if (!(w.end_s > w.start_s)) throw InvalidParameter("window '" + w.name + "' is empty");
        if (!edges_s.empty() && (w.start_s < edges_s.front() || w.end_s > edges_s.back())) {
            throw InvalidParameter("window '" + w.name + "' lies outside the histogram");
        }
    }
}

std::optional<CountWindow> CountHistogram::find_window(const std::string& name) const {
    for (const auto& w : windows) {
        if (w.name == name) return w;
    }
    return std::nullopt;
}

const CountWindow& CountHistogram::window(const std::string& name) const {
    for (const auto& w : windows) {
        if (w.name == name) return w;
    }
    throw InvalidParameter("histogram has no window named '" + name + "'");
}

long long CountHistogram::counts_in(double start, double end) const {
    long long total = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double c = 0.5 * (edges_s[k] + edges_s[k + 1]);
        if (c >= start && c < end) total += counts[k];
    }
    return total;
}

CountHistogram bin_timestamps(std::span<const double> ts, double t0, double t1, double width,
                              std::vector<CountWindow> windows, long long cycles) {
    if (!(width > 0.0)) throw InvalidParameter("bin width must be > 0");
    if (!(t1 > t0)) throw InvalidParameter("histogram range is empty");
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / width - 1e-9));
    CountHistogram h;
    h.edges_s.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) h.edges_s[k] = t0 + static_cast<double>(k) * width;
    h.counts.assign(n, 0);
    h.cycles = cycles;
    h.windows = std::move(windows);
    for (double t : ts) {
        if (!(t >= t0) || !(t < h.edges_s.back())) {
            ++h.dropped;
            continue;
        }
        auto k = static_cast<std::size_t>((t - t0) / width);
        if (k >= n) k = n - 1;
        ++h.counts[k];
    }
    h.validate();
    return h;
}

EfficiencyEstimate efficiency_from_histogram(const CountHistogram& h, const CountHistogram& ref,
                                             double calibration, const std::string& echo_name,
                                             const std::string& input_name,
                                             const std::string& noise_name) {
    h.validate();
    ref.validate();
    if (!(calibration > 0.0)) throw InvalidParameter("calibration divisor must be > 0");
    const double input = static_cast<double>(ref.counts_in(ref.window(input_name))) / ref.cycles;
    if (input <= 0.0) throw UndefinedResult("reference input window holds no counts");

    const auto& echo = h.window(echo_name);
    const double echo_counts = static_cast<double>(h.counts_in(echo));
    double noise = 0.0;
    if (const auto nw = h.find_window(noise_name)) {
        noise = static_cast<double>(h.counts_in(*nw)) * echo.length() / nw->length();
    } else {
        const double lo = std::max(h.edges_s.front(), echo.start_s - 0.5 * echo.length());
        const double hi = std::min(h.edges_s.back(), echo.end_s + 0.5 * echo.length());
        const double side_len = (echo.start_s - lo) + (hi - echo.end_s);
        if (side_len > 0.0) {
            const double side = static_cast<double>(h.counts_in(lo, echo.start_s) + h.counts_in(echo.end_s, hi));
            noise = side * echo.length() / side_len;
        }
    }
    EfficiencyEstimate e;
    e.raw = (echo_counts - noise) / h.cycles / input / calibration;
    e.value = std::clamp(e.raw, 0.0, 1.0);
    e.clamped = e.value != e.raw;
    return e;
}

SnrValue snr(const CountHistogram& h, const CountHistogram& noise_run, const std::string& window) {
    h.validate();
    noise_run.validate();
    const double s = static_cast<double>(h.counts_in(h.window(window))) / h.cycles;
    const double n = static_cast<double>(noise_run.counts_in(noise_run.window(window))) / noise_run.cycles;
    return snr_ratio(s, n);
}

std::vector<double> read_timestamps(std::istream& in) {
    std::vector<double> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(parse_double(t, number));
    }
    return out;
}

BinnedColumns read_two_column_csv(std::istream& in) {
    BinnedColumns out;
    std::string line;
    int number = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++number;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!header) {
            header = true;
            if (t.find_first_of("abcdfghijklmnopqrstuvwxyzABCDFGHIJKLMNOPQRSTUVWXYZ_") != std::string::npos) continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
            throw ParseError("expected two comma-separated columns", number);
        }
        out.x.push_back(parse_double(t.substr(0, comma), number));
        out.y.push_back(parse_double(t.substr(comma + 1), number));
    }
    if (out.x.empty()) throw ParseError("no data rows", number);
    return out;
}

CountHistogram histogram_from_binned(const BinnedColumns& b, std::vector<CountWindow> windows,
                                     long long cycles) {
    if (b.x.size() < 2) throw InvalidParameter("pre-binned data needs at least two bins");
    const double width = b.x[1] - b.x[0];
    CountHistogram h;
    h.cycles = cycles;
    h.windows = std::move(windows);
    for (std::size_t k = 0; k < b.x.size(); ++k) {
        h.edges_s.push_back(b.x[k] - 0.5 * width);
        if (b.y[k] < 0.0 || b.y[k] != std::floor(b.y[k])) {
            throw InvalidParameter("binned counts must be nonnegative integers");
        }
        h.counts.push_back(static_cast<long long>(b.y[k]));
    }
    h.edges_s.push_back(b.x.back() + 0.5 * width);
    h.validate();
    return h;
}

}  // namespace cppe
