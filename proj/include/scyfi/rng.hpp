#pragma once

#include <cstdint>

namespace scyfi {

// Counter-based splittable RNG. Every random draw anywhere in the toolkit is
// derived from (seed, salt...) hashes, so results never depend on thread
// count or evaluation order.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

}  // namespace rng

// Deterministic stream generator; cheap to copy, cheap to split.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(rng::splitmix64(seed)) {}

    std::uint64_t next_u64() {
        state_ = rng::splitmix64(state_);
        return state_;
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // modulo bias is irrelevant here (n << 2^64) but reject anyway
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // independent child stream
    Rng split(std::uint64_t salt) const { return Rng(rng::mix(state_, salt)); }

    static Rng from(std::uint64_t seed, std::uint64_t salt) { return Rng(rng::mix(seed, salt)); }
    static Rng from(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
        return Rng(rng::mix(rng::mix(seed, s1), s2));
    }

  private:
    std::uint64_t state_;
};

}  // namespace scyfi
