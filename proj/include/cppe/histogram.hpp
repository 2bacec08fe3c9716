#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cppe/echo.hpp"

namespace cppe {

/// Named analysis interval [start, end).
struct CountWindow {
    std::string name;
    double start_s = 0.0;
    double end_s = 0.0;

    double length() const { return end_s - start_s; }
};

struct CountHistogram {
    std::vector<double> edges_s;        ///< bins + 1 strictly increasing edges
    std::vector<long long> counts;
    long long cycles = 1;
    std::vector<CountWindow> windows;
    long long dropped = 0;              ///< timestamps outside the binned range

    std::size_t bins() const { return counts.size(); }
    void validate() const;
    const CountWindow& window(const std::string& name) const;
    std::optional<CountWindow> find_window(const std::string& name) const;
    /// Counts in bins whose center lies in [start, end).
    long long counts_in(double start_s, double end_s) const;
    long long counts_in(const CountWindow& w) const { return counts_in(w.start_s, w.end_s); }
};

/// Fixed-width binning of [t0, t1) (the last bin may extend past t1).
CountHistogram bin_timestamps(std::span<const double> timestamps_s, double t0_s, double t1_s,
                              double bin_width_s, std::vector<CountWindow> windows = {},
                              long long cycles = 1);

struct EfficiencyEstimate {
    double value = 0.0;
    double raw = 0.0;       ///< before clamping to [0, 1]
    bool clamped = false;
};

/// (echo counts - noise counts scaled to the echo window length) / input counts of the
/// reference, all per cycle, divided by `calibration`. The noise comes from the "noise"
/// window when present, otherwise from the two flanking sidebands of the echo window.
EfficiencyEstimate efficiency_from_histogram(const CountHistogram& h, const CountHistogram& reference,
                                             double calibration = 1.0,
                                             const std::string& echo_window = "echo",
                                             const std::string& input_window = "input",
                                             const std::string& noise_window = "noise");

/// Per-cycle counts of `window` in h over the same window of noise_run.
SnrValue snr(const CountHistogram& h, const CountHistogram& noise_run,
             const std::string& window = "echo");

/// One timestamp (seconds) per line; blank lines and '#' comments are skipped.
std::vector<double> read_timestamps(std::istream& in);

struct BinnedColumns {
    std::vector<double> x;
    std::vector<double> y;
};

/// Two-column CSV with a header line; ParseError carries the 1-based line number.
BinnedColumns read_two_column_csv(std::istream& in);

/// Histogram from a pre-binned `t_s,counts` CSV; bin centers at t_s, equal widths.
CountHistogram histogram_from_binned(const BinnedColumns& binned,
                                     std::vector<CountWindow> windows = {}, long long cycles = 1);

}  // namespace cppe
