#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>

namespace bran {

// Basic configuration of the access network: request arrival rate,
// block generation rate, per-link service rate, and the number of
// simultaneous access links. Immutable after construction; all rates
// are validated here so downstream code can assume a valid config.
class SystemConfig {
  public:
    SystemConfig(double lambda_a, double lambda_b, double lambda_c, int s)
        : lambda_a_(lambda_a), lambda_b_(lambda_b), lambda_c_(lambda_c), s_(s) {
        if (!(lambda_a > 0.0))
            throw std::invalid_argument("lambda_a must be positive");
        if (!(lambda_b > 0.0))
            throw std::invalid_argument("lambda_b must be positive");
        if (!(lambda_c > 0.0))
            throw std::invalid_argument("lambda_c must be positive");
        if (s < 1)
            throw std::invalid_argument("s must be at least 1");
    }

    double lambda_a() const { return lambda_a_; }
    double lambda_b() const { return lambda_b_; }
    double lambda_c() const { return lambda_c_; }
    int s() const { return s_; }

    double mean_interarrival() const { return 1.0 / lambda_a_; }
    double mean_block_time() const { return 1.0 / lambda_b_; }
    double mean_service_time() const { return 1.0 / lambda_c_; }

  private:
    double lambda_a_;
    double lambda_b_;
    double lambda_c_;
    int s_;
};

// rho = lambda_a / (s * lambda_c); offered load per link.
inline double traffic_intensity(const SystemConfig& cfg) {
    return cfg.lambda_a() / (cfg.s() * cfg.lambda_c());
}

// Stable iff rho < 1.
inline bool is_stable(const SystemConfig& cfg) {
    return traffic_intensity(cfg) < 1.0;
}

// min(j, s) * lambda_c: aggregate completion rate with j requests in the
// confirmed queue or in service.
inline double service_completion_rate(long long j, const SystemConfig& cfg) {
    if (j < 0) throw std::invalid_argument("j must be nonnegative");
    return static_cast<double>(std::min<long long>(j, cfg.s())) * cfg.lambda_c();
}

class ConfirmationPolicy {
  public:
    explicit ConfirmationPolicy(int n) : n_(n) {
        if (n < 1)
            throw std::invalid_argument("n_confirmations must be at least 1");
    }
    int n_confirmations() const { return n_; }

  private:
    int n_;
};

// Attacker with relative mining rate beta. give_up is the deficit at which
// the attacker abandons the fork; nullopt means it never gives up.
// A finite give_up must be >= 1: a threshold of 0 would mean abandoning the
// instant any deficit exists, which degenerates the race and is excluded.
class AttackerProfile {
  public:
    AttackerProfile(double beta, std::optional<long long> give_up)
        : beta_(beta), give_up_(give_up) {
        if (beta < 0.0)
            throw std::invalid_argument("beta must be nonnegative");
        if (give_up && *give_up < 1)
            throw std::invalid_argument("finite give_up must be at least 1");
    }

    double beta() const { return beta_; }
    bool unbounded() const { return !give_up_.has_value(); }
    std::optional<long long> give_up() const { return give_up_; }

  private:
    double beta_;
    std::optional<long long> give_up_;
};

}  // namespace bran
