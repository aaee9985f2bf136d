#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bran/config.hpp"
#include "bran/errors.hpp"
#include "bran/rng.hpp"

namespace bran {

// Per-request trace of the four workflow stages. Latency is the waiting
// time service_start - arrival_time (stages 1-3); sojourn adds service.
struct Request {
    long long id = 0;
    double arrival_time = 0.0;
    int confirmations = 0;
    double service_start = 0.0;
    double service_end = 0.0;
};

struct LatencyStats {
    double mean = 0.0;
    double ci95_halfwidth = 0.0;
};

struct SimResult {
    std::vector<double> latencies;           // post-warmup, completion order
    std::vector<Request> records;            // post-warmup served requests
    std::unordered_map<long long, double> occupancy;  // N = 1 runs only
    long long served_count = 0;
    double horizon = 0.0;                    // measured window length
    double mean_latency = 0.0;
    double ci95_halfwidth = 0.0;
    double mean_sojourn = 0.0;
    double time_avg_in_system = 0.0;         // time average of i + j over the window
    long long arrivals_total = 0;            // whole run, including warm-up
    long long served_total = 0;              // whole run, including warm-up
    long long in_system_at_end = 0;
    bool unstable_config = false;

    static long long occupancy_key(long long i, long long j) {
        return (i << 32) | j;
    }
    double occupancy_time(long long i, long long j) const {
        auto it = occupancy.find(occupancy_key(i, j));
        return it == occupancy.end() ? 0.0 : it->second;
    }
};

// Batch-means estimate over 20 equal batches; CI half-width from the
// t distribution with 19 degrees of freedom.
inline LatencyStats latency_stats(const std::vector<double>& latencies) {
    constexpr int kBatches = 20;
    constexpr double kT975Df19 = 2.093024054408263;
    const std::size_t n = latencies.size();
    if (n < 2 * kBatches)
        throw TooFewSamplesError("need at least 40 served requests for batch means");

    double total = 0.0;
    for (double x : latencies) total += x;
    LatencyStats out;
    out.mean = total / static_cast<double>(n);

    const std::size_t base = n / kBatches;
    std::size_t extra = n % kBatches;
    std::vector<double> batch_means;
    batch_means.reserve(kBatches);
    std::size_t pos = 0;
    for (int b = 0; b < kBatches; ++b) {
        std::size_t len = base + (extra > 0 ? 1 : 0);
        if (extra > 0) --extra;
        double acc = 0.0;
        for (std::size_t k = 0; k < len; ++k) acc += latencies[pos + k];
        pos += len;
        batch_means.push_back(acc / static_cast<double>(len));
    }
    double bm = 0.0;
    for (double x : batch_means) bm += x;
    bm /= kBatches;
    double var = 0.0;
    for (double x : batch_means) var += (x - bm) * (x - bm);
    var /= (kBatches - 1);
    out.ci95_halfwidth = kT975Df19 * std::sqrt(var / kBatches);
    return out;
}

inline LatencyStats latency_stats(const SimResult& result) {
    return latency_stats(result.latencies);
}

// Event-driven run of the access workflow: Poisson arrivals, Poisson block
// epochs, s exponential links. Every block includes all pending requests
// (unlimited block size); a request enters service FIFO once it holds N
// confirmations. Ties at equal timestamps are processed block, then
// service completion, then arrival.
inline SimResult run_simulation(const SystemConfig& cfg, const ConfirmationPolicy& policy,
                                long long served_target, double warmup_fraction,
                                std::uint64_t seed) {
    if (served_target < 1)
        throw std::invalid_argument("served_target must be at least 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw std::invalid_argument("warmup_fraction must be in [0, 1)");

    const int N = policy.n_confirmations();
    const long long warmup_count =
        static_cast<long long>(std::llround(warmup_fraction * static_cast<double>(served_target)));

    struct Pending {
        long long id;
        double arrival;
    };
    struct Completion {
        double time;
        long long id;
        double arrival;
        double service_start;
        bool operator>(const Completion& o) const { return time > o.time; }
    };
    struct Cohort {
        int confirmations;
        std::vector<Pending> requests;
    };

    Rng rng(seed);
    SimResult res;
    res.unstable_config = !is_stable(cfg);

    std::vector<Pending> stage1;             // awaiting block inclusion
    std::deque<Cohort> cohorts;              // in blocks, short of N confirmations
    std::deque<Pending> confirmed;           // FIFO, eligible for service
    std::priority_queue<Completion, std::vector<Completion>, std::greater<>> completions;
    int busy = 0;

    double t = 0.0;
    double next_arrival = sample_exponential(rng, cfg.lambda_a());
    double next_block = sample_exponential(rng, cfg.lambda_b());
    long long next_id = 0;
    long long served_window = 0;
    bool warm_done = (warmup_count == 0);
    double window_start = 0.0;
    double area_in_system = 0.0;

    auto in_system = [&]() -> long long {
        long long n = static_cast<long long>(stage1.size()) +
                      static_cast<long long>(confirmed.size()) + busy;
        for (const Cohort& c : cohorts) n += static_cast<long long>(c.requests.size());
        return n;
    };
    auto start_services = [&]() {
        while (busy < cfg.s() && !confirmed.empty()) {
            Pending p = confirmed.front();
            confirmed.pop_front();
            ++busy;
            const double dur = sample_exponential(rng, cfg.lambda_c());
            completions.push({t + dur, p.id, p.arrival, t});
        }
    };

    while (true) {
        // pick the next event; block beats service beats arrival on ties
        enum { kBlock, kService, kArrival } kind = kBlock;
        double ev = next_block;
        if (!completions.empty() && completions.top().time < ev) {
            ev = completions.top().time;
            kind = kService;
        }
        if (next_arrival < ev) {
            ev = next_arrival;
            kind = kArrival;
        }

        if (warm_done) {
            const double dt = ev - t;
            const long long i = static_cast<long long>(stage1.size());
            const long long j = static_cast<long long>(confirmed.size()) + busy;
            area_in_system += static_cast<double>(in_system()) * dt;
            if (N == 1)
                res.occupancy[SimResult::occupancy_key(i, j)] += dt;
        }
        t = ev;

        if (kind == kBlock) {
            next_block = t + sample_exponential(rng, cfg.lambda_b());
            for (Cohort& c : cohorts) ++c.confirmations;
            while (!cohorts.empty() && cohorts.front().confirmations >= N) {
                for (Pending& p : cohorts.front().requests) confirmed.push_back(p);
                cohorts.pop_front();
            }
            if (!stage1.empty()) {
                if (N == 1) {
                    for (Pending& p : stage1) confirmed.push_back(p);
                } else {
                    cohorts.push_back({1, std::move(stage1)});
                }
                stage1.clear();
            }
            start_services();
        } else if (kind == kService) {
            Completion c = completions.top();
            completions.pop();
            --busy;
            ++res.served_total;
            if (warm_done) {
                res.latencies.push_back(c.service_start - c.arrival);
                res.records.push_back({c.id, c.arrival, N, c.service_start, t});
                ++served_window;
            } else if (res.served_total == warmup_count) {
                warm_done = true;
                window_start = t;
            }
            if (warm_done && served_window == served_target) break;
            start_services();
        } else {
            next_arrival = t + sample_exponential(rng, cfg.lambda_a());
            stage1.push_back({next_id++, t});
            ++res.arrivals_total;
        }
    }

    res.served_count = served_window;
    res.horizon = t - window_start;
    res.in_system_at_end = in_system();
    res.time_avg_in_system = res.horizon > 0.0 ? area_in_system / res.horizon : 0.0;

    double soj = 0.0;
    for (const Request& r : res.records) soj += r.service_end - r.arrival_time;
    res.mean_sojourn = res.served_count > 0 ? soj / static_cast<double>(res.served_count) : 0.0;

    if (res.latencies.size() >= 40) {
        const LatencyStats st = latency_stats(res.latencies);
        res.mean_latency = st.mean;
        res.ci95_halfwidth = st.ci95_halfwidth;
    } else if (!res.latencies.empty()) {
        double acc = 0.0;
        for (double x : res.latencies) acc += x;
        res.mean_latency = acc / static_cast<double>(res.latencies.size());
    }
    return res;
}

}  // namespace bran
