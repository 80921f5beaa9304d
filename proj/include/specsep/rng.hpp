#pragma once

#include <cstdint>
#include <string_view>

namespace specsep::rng {

// SplitMix64 output function (Steele, Lea & Flood). Stateless: the value at
// counter i is a pure function of (seed, i), which is what makes per-task
// sub-seeding and parallel replay possible.
inline std::uint64_t splitmix64(std::uint64_t state) {
    std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash chain for deriving independent sub-seeds from a master seed plus any
// number of integer parts (experiment id hash, grid point hash, repetition,
// row index, ...). derive(s, a, b) != derive(s, b, a) by construction.
inline std::uint64_t derive(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
std::uint64_t derive(std::uint64_t seed, std::uint64_t part, Rest... rest) {
    return derive(splitmix64(seed ^ splitmix64(part + 0x632be59bd9b4e019ULL)), rest...);
}

// FNV-1a, used to fold strings (experiment ids, axis names) into seed parts.
inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Sequential stream over the SplitMix64 counter sequence.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        const std::uint64_t v = splitmix64(state_);
        state_ += 0x9e3779b97f4a7c15ULL;
        return v;
    }

    // Uniform double in the open interval (0, 1).
    double next_unit_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) via Lemire's multiply-shift reduction.
    std::uint64_t next_below(std::uint64_t bound) {
        const unsigned __int128 m =
            static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal draw by inverting the Gaussian CDF (Wichura's AS241,
    // PPND16). Exactly one uniform is consumed per normal, so streams stay
    // aligned across refactors.
    double next_normal();

  private:
    std::uint64_t state_;
};

// Quantile function of the standard normal distribution, |error| < 1e-15 for
// p in (0, 1). Throws ConfigError outside the open interval.
double inverse_normal_cdf(double p);

}  // namespace specsep::rng
