#pragma once

#include <stdexcept>
#include <vector>

#include "bran/config.hpp"
#include "bran/ctmc.hpp"
#include "bran/security.hpp"

namespace bran {

struct TradeoffPoint {
    int n = 1;
    double latency = 0.0;      // relative to the mean service time
    double attack_prob = 0.0;  // never-give-up attacker, the worst case
};

// Latency-security curve: one point per confirmation count. Consecutive
// latencies differ by exactly one mean block time, so only the N = 1 chain
// is solved. The security coordinate uses the unbounded give-up limit.
inline std::vector<TradeoffPoint> tradeoff_curve(const SystemConfig& cfg, double beta,
                                                 int n_max, const Truncation& trunc,
                                                 double tol = 1e-10) {
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    const double base = expected_latency(ConfirmationPolicy(1), cfg, trunc, tol);
    std::vector<TradeoffPoint> curve;
    curve.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        TradeoffPoint pt;
        pt.n = n;
        pt.latency = base + cfg.mean_block_time() * (n - 1);
        pt.attack_prob = beta == 0.0 ? 0.0 : attack_success_prob(n, beta, std::nullopt);
        curve.push_back(pt);
    }
    return curve;
}

inline std::vector<TradeoffPoint> tradeoff_curve(const SystemConfig& cfg, double beta,
                                                 int n_max = 10) {
    return tradeoff_curve(cfg, beta, n_max, Truncation::default_for(cfg));
}

}  // namespace bran
