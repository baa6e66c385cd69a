#pragma once

#include <cmath>
#include <cstdint>

namespace mppctl {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for an independent sub-experiment, e.g. the second route of a two-route check.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

/// Counter-based stream: draw k of stream (seed, id) is mix64(key + k * gamma).
/// Any draw can be recomputed from (seed, id, k) alone, so trajectories do not
/// depend on worker count or scheduling.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed + 0x9e3779b97f4a7c15ULL * (mix64(stream) | 1ULL))) {}

    std::uint64_t next_u64() { return mix64(key_ + kGamma * ++counter_); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform()); }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mppctl
