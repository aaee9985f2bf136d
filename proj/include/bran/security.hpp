#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bran/config.hpp"
#include "bran/errors.hpp"
#include "bran/rng.hpp"

namespace bran {

// One simulated fork race: whether the attacker won and how many blocks
// it mined along the way.
struct RaceOutcome {
    bool success = false;
    long long blocks_spent = 0;
};

struct RaceSimResult {
    long long trials = 0;
    long long successes = 0;
    double success_fraction = 0.0;
    std::vector<RaceOutcome> outcomes;  // filled only on request
};

// Pr{Y = n} for Y ~ NegBin(N, 1/(1+beta)): the number of attacker blocks
// mined while the honest chain gains N confirmations. Evaluated in
// log-space so large n and N stay finite.
inline double neg_binom_pmf(long long n, int N, double beta) {
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (beta == 0.0) return n == 0 ? 1.0 : 0.0;
    const double log_binom = std::lgamma(static_cast<double>(n) + N) -
                             std::lgamma(static_cast<double>(n) + 1) -
                             std::lgamma(static_cast<double>(N));
    const double log_p = -std::log1p(beta);              // log 1/(1+beta)
    const double log_q = std::log(beta) + log_p;         // log beta/(1+beta)
    return std::exp(log_binom + N * log_p + n * log_q);
}

// Gambler's-ruin catch-up probability: chance the fork race, starting n
// blocks behind, reaches deficit -1 before the give-up deficit. The
// beta = 1 branch is taken within 1e-9 of 1 to avoid the 0/0 form.
inline double catchup_prob(long long n, double beta,
                           std::optional<long long> give_up) {
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (give_up && *give_up < 1)
        throw std::invalid_argument("finite give_up must be at least 1");
    if (n < 0) return 1.0;
    if (!give_up) {
        if (beta >= 1.0) return 1.0;
        return std::pow(beta, static_cast<double>(n + 1));
    }
    const long long ng = *give_up;
    if (n >= ng) return 0.0;
    if (std::abs(beta - 1.0) < 1e-9)
        return static_cast<double>(ng - n) / static_cast<double>(ng + 1);
    if (beta < 1.0) {
        const double num = std::pow(beta, static_cast<double>(n + 1)) -
                           std::pow(beta, static_cast<double>(ng + 1));
        return num / (1.0 - std::pow(beta, static_cast<double>(ng + 1)));
    }
    // beta > 1: same ratio with negative exponents to avoid overflow.
    return (1.0 - std::pow(beta, static_cast<double>(n - ng))) /
           (1.0 - std::pow(beta, static_cast<double>(-(ng + 1))));
}

// Probability of a successful alternative history attack against a block
// with N confirmations. The infinite sum over the attacker's head start
// collapses to a complement over n = 0..N because every head start beyond
// N wins with certainty.
inline double attack_success_prob(int N, double beta,
                                  std::optional<long long> give_up) {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (beta == 0.0) return 0.0;
    if (!give_up && beta >= 1.0) return 1.0;
    double miss = 0.0;  // sum of pmf(n) * Pr{lose | n blocks mined}
    for (long long n = 0; n <= N; ++n)
        miss += neg_binom_pmf(n, N, beta) * (1.0 - catchup_prob(N - n, beta, give_up));
    double s = 1.0 - miss;
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    return s;
}

// Monte-Carlo fork race, the independent check on the closed form.
// Phase 1: sequential Bernoulli steps until the honest chain has N blocks,
// counting attacker blocks. Phase 2: deficit random walk, absorbing at
// deficit -1 (success) and at the give-up deficit (failure). Unbounded
// races with beta < 1 are cut off once the remaining win probability drops
// below 1e-12 (deficit d with beta^d < 1e-12, capped at 10^4) and counted
// as failure.
inline RaceSimResult simulate_attack_race(int N, double beta,
                                          std::optional<long long> give_up,
                                          long long trials, std::uint64_t seed,
                                          bool record_outcomes = false) {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (!(beta > 0.0))
        throw std::invalid_argument("beta must be positive; beta = 0 is analytic");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (give_up && *give_up < 1)
        throw std::invalid_argument("finite give_up must be at least 1");

    constexpr long long kUnboundedCutoff = 10000;
    constexpr long long kStepHorizon = 100000000;
    long long fail_deficit = kUnboundedCutoff;
    if (give_up) {
        fail_deficit = *give_up;
    } else if (beta < 1.0) {
        const long long d = static_cast<long long>(
            std::ceil(std::log(1e-12) / std::log(beta)));
        fail_deficit = std::min(kUnboundedCutoff, std::max<long long>(d, 64));
    }
    const double attacker_step = beta / (1.0 + beta);

    Rng rng(seed);
    RaceSimResult res;
    res.trials = trials;
    if (record_outcomes) res.outcomes.reserve(static_cast<std::size_t>(trials));

    for (long long t = 0; t < trials; ++t) {
        long long honest = 0, mined = 0;
        while (honest < N) {
            if (sample_bernoulli(rng, attacker_step))
                ++mined;
            else
                ++honest;
        }
        long long deficit = N - mined;
        bool success = false;
        long long steps = 0;
        while (true) {
            if (deficit < 0) { success = true; break; }
            if (deficit >= fail_deficit) break;
            if (++steps > kStepHorizon)
                throw NonConvergenceError("attack race exceeded the step horizon");
            if (sample_bernoulli(rng, attacker_step)) {
                --deficit;
                ++mined;
            } else {
                ++deficit;
            }
        }
        if (success) ++res.successes;
        if (record_outcomes) res.outcomes.push_back({success, mined});
    }
    res.success_fraction = static_cast<double>(res.successes) / static_cast<double>(trials);
    return res;
}

}  // namespace bran
