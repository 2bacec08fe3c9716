#include <gtest/gtest.h>

#include <sstream>

#include "cppe/error.hpp"
#include "cppe/histogram.hpp"

using namespace cppe;

namespace {

CountHistogram flat_histogram(long long per_bin, int bins, double width, long long cycles = 1) {
    CountHistogram h;
    for (int k = 0; k <= bins; ++k) h.edges_s.push_back(k * width);
    h.counts.assign(bins, per_bin);
    h.cycles = cycles;
    return h;
}

}  // namespace

TEST(BinTimestamps, CountsAndDropped) {
    const std::vector<double> ts = {0.5e-6, 1.5e-6, 1.6e-6, 3.9e-6, 5e-6, -1e-6};
    const auto h = bin_timestamps(ts, 0.0, 4e-6, 1e-6);
    ASSERT_EQ(h.bins(), 4u);
    EXPECT_EQ(h.counts, (std::vector<long long>{1, 2, 0, 1}));
    EXPECT_EQ(h.dropped, 2);
}

TEST(BinTimestamps, RejectsBadRange) {
    const std::vector<double> ts;
    EXPECT_THROW(bin_timestamps(ts, 0.0, 1.0, 0.0), InvalidParameter);
    EXPECT_THROW(bin_timestamps(ts, 1.0, 1.0, 0.1), InvalidParameter);
}

TEST(Efficiency, KnownCountsWithNoiseWindow) {
    auto h = flat_histogram(2, 100, 1e-6, 10);
    for (int k = 40; k < 44; ++k) h.counts[k] += 25;  // 100 signal counts
    h.windows = {{"echo", 40e-6, 44e-6}, {"noise", 79e-6, 98e-6}};
    auto ref = flat_histogram(0, 100, 1e-6, 5);
    for (int k = 10; k < 12; ++k) ref.counts[k] = 250;  // 100 per cycle
    ref.windows = {{"input", 10e-6, 12e-6}};
    const auto e = efficiency_from_histogram(h, ref);
    EXPECT_NEAR(e.value, 10.0 / 100.0, 1e-12);
    EXPECT_FALSE(e.clamped);
    EXPECT_NEAR(efficiency_from_histogram(h, ref, 0.5).value, 0.2, 1e-12);
}

TEST(Efficiency, SidebandNoiseWhenNoNoiseWindow) {
    auto h = flat_histogram(3, 100, 1e-6);
    for (int k = 40; k < 44; ++k) h.counts[k] += 5;
    h.windows = {{"echo", 40e-6, 44e-6}};
    auto ref = flat_histogram(1, 100, 1e-6);
    ref.windows = {{"input", 0.0, 40e-6}};
    EXPECT_NEAR(efficiency_from_histogram(h, ref).value, 20.0 / 40.0, 1e-12);
}

TEST(Efficiency, ZeroReferenceIsUndefined) {
    auto h = flat_histogram(1, 10, 1e-6);
    h.windows = {{"echo", 0.0, 2e-6}};
    auto ref = flat_histogram(0, 10, 1e-6);
    ref.windows = {{"input", 0.0, 2e-6}};
    EXPECT_THROW(efficiency_from_histogram(h, ref), UndefinedResult);
}

TEST(Efficiency, NoiseAboveEchoClampsToZero) {
    auto h = flat_histogram(1, 100, 1e-6);
    h.counts[80] = 50;
    h.windows = {{"echo", 40e-6, 44e-6}, {"noise", 78e-6, 82e-6}};
    auto ref = flat_histogram(1, 100, 1e-6);
    ref.windows = {{"input", 0.0, 10e-6}};
    const auto e = efficiency_from_histogram(h, ref);
    EXPECT_EQ(e.value, 0.0);
    EXPECT_TRUE(e.clamped);
    EXPECT_LT(e.raw, 0.0);
}

TEST(Snr, RatioOfPerCycleCounts) {
    auto h = flat_histogram(10, 10, 1e-6, 2);
    h.windows = {{"echo", 0.0, 2e-6}};
    auto n = flat_histogram(1, 10, 1e-6, 4);
    n.windows = {{"echo", 0.0, 2e-6}};
    EXPECT_NEAR(snr(h, n).value, 20.0, 1e-12);
    auto zero = flat_histogram(0, 10, 1e-6);
    zero.windows = n.windows;
    EXPECT_TRUE(snr(h, zero).infinite);
}

TEST(Histogram, ValidationErrors) {
    auto h = flat_histogram(1, 4, 1e-6);
    h.windows = {{"w", 3e-6, 9e-6}};
    EXPECT_THROW(h.validate(), InvalidParameter);
    h.windows.clear();
    h.counts[1] = -1;
    EXPECT_THROW(h.validate(), InvalidParameter);
    EXPECT_THROW(flat_histogram(1, 4, 1e-6).window("missing"), InvalidParameter);
}

TEST(ReadCsv, ParsesWithHeaderAndReportsLine) {
    std::istringstream good("t_s,counts\n0,1\n1e-6,4\n");
    const auto b = read_two_column_csv(good);
    EXPECT_EQ(b.x, (std::vector<double>{0.0, 1e-6}));
    EXPECT_EQ(b.y, (std::vector<double>{1.0, 4.0}));

    std::istringstream bad("t_s,counts\n0,1\n1e-6;4\n");
    try {
        read_two_column_csv(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    std::istringstream nan_row("x,y\n0,1\n2,abc\n");
    try {
        read_two_column_csv(nan_row);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(ReadTimestamps, SkipsCommentsAndBlanks) {
    std::istringstream in("# run 1\n1e-6\n\n2e-6\n");
    EXPECT_EQ(read_timestamps(in), (std::vector<double>{1e-6, 2e-6}));
    std::istringstream bad("1e-6\nfoo\n");
    EXPECT_THROW(read_timestamps(bad), ParseError);
}

TEST(HistogramFromBinned, CentersBecomeBins) {
    BinnedColumns b{{1e-6, 2e-6, 3e-6}, {4, 5, 6}};
    const auto h = histogram_from_binned(b);
    ASSERT_EQ(h.bins(), 3u);
    EXPECT_NEAR(h.edges_s.front(), 0.5e-6, 1e-18);
    EXPECT_NEAR(h.edges_s.back(), 3.5e-6, 1e-18);
    EXPECT_EQ(h.counts_in(1.5e-6, 3.5e-6), 11);
    BinnedColumns frac{{1e-6, 2e-6}, {1.5, 2}};
    EXPECT_THROW(histogram_from_binned(frac), InvalidParameter);
}
