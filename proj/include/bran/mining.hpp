#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bran/rng.hpp"

namespace bran {

// Poisson block-generation process with rate lambda_b (blocks per time
// unit). Mean block time is 1/rate.
class MiningProcess {
  public:
    explicit MiningProcess(double rate) : rate_(rate) {
        if (!(rate > 0.0))
            throw std::invalid_argument("mining rate must be positive");
    }
    double rate() const { return rate_; }

  private:
    double rate_;
};

struct BlockTimeSample {
    std::vector<double> durations;  // inter-block times, all > 0
};

// Pr{W >= m} for the geometric number of failed hash trials before the
// first success: (1-p)^m.
inline double geometric_tail(double p, long long m) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("p must be in (0, 1]");
    if (m < 0) throw std::invalid_argument("m must be nonnegative");
    return std::pow(1.0 - p, static_cast<double>(m));
}

// Pr{U > tau} = exp(-rate * tau) for the exponential block time.
inline double block_time_tail(double rate, double tau) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
    if (tau < 0.0) throw std::invalid_argument("tau must be nonnegative");
    return std::exp(-rate * tau);
}

enum class IntervalCount { zero, exactly_one, two_or_more };

// Probability of the given block count in an interval of length h.
// The three kinds partition the outcome space and sum to 1.
inline double interval_block_count_prob(double rate, double h, IntervalCount kind) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    const double x = rate * h;
    switch (kind) {
        case IntervalCount::zero:
            return std::exp(-x);
        case IntervalCount::exactly_one:
            return x * std::exp(-x);
        case IntervalCount::two_or_more:
            return 1.0 - (1.0 + x) * std::exp(-x);
    }
    throw std::logic_error("unreachable");
}

// count i.i.d. exponential block times; deterministic for a fixed seed.
inline BlockTimeSample sample_block_times(const MiningProcess& proc,
                                          long long count,
                                          std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be at least 1");
    Rng rng(seed);
    BlockTimeSample out;
    out.durations.reserve(static_cast<std::size_t>(count));
    for (long long k = 0; k < count; ++k)
        out.durations.push_back(sample_exponential(rng, proc.rate()));
    return out;
}

}  // namespace bran
