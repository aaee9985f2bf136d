#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "bran/config.hpp"
#include "bran/errors.hpp"

namespace bran {

// Probability that an arriving request must wait in an M/M/s queue with
// offered load a = lambda/mu. Computed through the Erlang-B recurrence
// B(k) = a B(k-1) / (k + a B(k-1)), which stays in [0,1] throughout and
// avoids the factorials of the textbook ratio form.
inline double erlang_c(int s, double a) {
    if (s < 1) throw std::invalid_argument("s must be at least 1");
    if (a < 0.0) throw std::invalid_argument("offered load must be nonnegative");
    if (a >= s)
        throw std::invalid_argument("offered load must be below s for a finite queue");
    if (a == 0.0) return 0.0;
    double b = 1.0;
    for (int k = 1; k <= s; ++k)
        b = a * b / (k + a * b);
    return s * b / (s - a * (1.0 - b));
}

// Tandem M/M/1 + M/M/s upper bound; nullopt when lambda_b <= lambda_a
// (the assembling queue has no finite mean wait).
inline std::optional<double> latency_upper(const ConfirmationPolicy& N,
                                           const SystemConfig& cfg) {
    if (!is_stable(cfg))
        throw UnstableConfigError("rho >= 1: latency unbounded");
    if (cfg.lambda_b() <= cfg.lambda_a())
        return std::nullopt;
    const double a = cfg.lambda_a() / cfg.lambda_c();
    return 1.0 / (cfg.lambda_b() - cfg.lambda_a()) +
           erlang_c(cfg.s(), a) / (cfg.s() * cfg.lambda_c() - cfg.lambda_a()) +
           (N.n_confirmations() - 1) / cfg.lambda_b();
}

// Instant-assembly lower bound: pure M/M/s wait plus confirmation delay.
inline double latency_lower_mms(const ConfirmationPolicy& N, const SystemConfig& cfg) {
    if (!is_stable(cfg))
        throw UnstableConfigError("rho >= 1: bound undefined");
    const double a = cfg.lambda_a() / cfg.lambda_c();
    return erlang_c(cfg.s(), a) / (cfg.s() * cfg.lambda_c() - cfg.lambda_a()) +
           (N.n_confirmations() - 1) / cfg.lambda_b();
}

// Block-delay-only lower bound N/lambda_b; independent of the arrival rate.
inline double latency_lower_block(const ConfirmationPolicy& N, const SystemConfig& cfg) {
    return N.n_confirmations() / cfg.lambda_b();
}

// Marginal distribution of the pending count i: geometric with ratio
// lambda_a / (lambda_a + lambda_b).
inline double pending_count_pmf(const SystemConfig& cfg, long long i) {
    if (i < 0) throw std::invalid_argument("i must be nonnegative");
    const double denom = cfg.lambda_a() + cfg.lambda_b();
    return (cfg.lambda_b() / denom) *
           std::pow(cfg.lambda_a() / denom, static_cast<double>(i));
}

}  // namespace bran
