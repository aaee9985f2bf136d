#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bran {

// All randomness in the toolkit goes through std::mt19937_64 seeded
// explicitly by the caller. Exponential variates are drawn by inversion,
// -ln(U)/lambda, so a run is fully determined by its seed.
using Rng = std::mt19937_64;

// Uniform on (0, 1]: top 53 bits mapped to (0,1], never returning 0 so the
// logarithm below is always finite.
inline double uniform_open0(Rng& rng) {
    const std::uint64_t bits = rng() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 1.0) * 0x1p-53;
}

inline double sample_exponential(Rng& rng, double rate) {
    return -std::log(uniform_open0(rng)) / rate;
}

// Bernoulli(p) without touching the global distribution machinery.
inline bool sample_bernoulli(Rng& rng, double p) {
    return uniform_open0(rng) <= p;
}

// Derive an independent sub-seed for a parallel lane.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t lane) {
    std::seed_seq seq{base, lane};
    std::uint64_t out[2];
    seq.generate(reinterpret_cast<std::uint32_t*>(out),
                 reinterpret_cast<std::uint32_t*>(out) + 4);
    return out[0];
}

}  // namespace bran
