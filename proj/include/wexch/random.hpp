#pragma once

#include <bit>
#include <cstdint>

namespace wexch {

// Counter-based pseudo-random source keyed by (seed, stream). Same pair
// reproduces the same draws; distinct streams are independent for our
// purposes. The scrambler is the splitmix64 finalizer, which is stateless,
// so values are identical across platforms and thread schedules.
class RandomSource {
  public:
    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ mix(stream + kGamma))), counter_(0) {}

    explicit RandomSource(std::uint64_t seed) : RandomSource(seed, 0) {}

    // Child source keyed off this one; used for nested derivations
    // (replicate -> coordinate). Deterministic in (seed, stream, id).
    RandomSource derive(std::uint64_t stream_id) const {
        return RandomSource(key_, stream_id);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Index into a cumulative-probability table; cdf must end at ~1.
    int pick(const double* cdf, int k) {
        const double u = uniform();
        for (int i = 0; i < k - 1; ++i)
            if (u < cdf[i]) return i;
        return k - 1;
    }

    // Geometric index I >= 1 with P(I = i) = 2^-i, exact via the position
    // of the leading set bit of uniform 64-bit draws. An all-zero word
    // means the first 64 flips failed, so the scan continues at the next
    // word with the offset carried over; no truncation bias at any index.
    int geometric_half() {
        int offset = 0;
        for (;;) {
            const std::uint64_t u = next_u64();
            if (u != 0) return offset + std::countl_zero(u) + 1;
            offset += 64;
        }
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z += kGamma;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace wexch
