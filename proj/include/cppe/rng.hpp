#pragma once

#include <cstdint>
#include <limits>

namespace cppe {

/// Identifies one independent random stream: a master seed plus a stream index
/// (the Monte-Carlo cycle number).
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Counter-keyed SplitMix64 generator.
///
/// Seeding is O(1), so every Monte-Carlo cycle gets its own stream and results do not
/// depend on how cycles are distributed over threads.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(RngSpec spec)
        : state_(mix(spec.seed ^ mix(spec.stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// True with probability p (p <= 0 never, p >= 1 always).
    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace cppe
