#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

namespace condexp {

/// SplitMix64 output function (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: draw i of a stream with key K is
/// splitmix64_mix(K + (i+1) * 0x9E3779B97F4A7C15). Every run of a simulation owns
/// the stream keyed by substream_key(seed, run_index), so results do not depend
/// on how runs are spread over threads.
class CounterRng {
  public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t run_index) {
        return splitmix64_mix(splitmix64_mix(seed) ^ splitmix64_mix(run_index + kGamma));
    }
    static constexpr CounterRng for_run(std::uint64_t seed, std::uint64_t run_index) {
        return CounterRng(substream_key(seed, run_index));
    }

    constexpr std::uint64_t next_u64() { return splitmix64_mix(key_ + (++counter_) * kGamma); }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Index i with cumulative[i-1] <= u < cumulative[i] for u = uniform().
    /// `cumulative` must be nondecreasing; zero-probability entries are never chosen.
    std::size_t sample(std::span<const double> cumulative) {
        const double u = uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), cumulative.back());
        return static_cast<std::size_t>(it - cumulative.begin());
    }

    constexpr std::uint64_t key() const { return key_; }
    constexpr std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace condexp
