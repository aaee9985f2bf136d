#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bran/config.hpp"
#include "bran/errors.hpp"

namespace bran {

// State E(i, j) of the one-confirmation chain: i pending requests waiting
// to be assembled into a block, j confirmed requests waiting or in service.
struct QueueState {
    int i = 0;
    int j = 0;
    friend bool operator==(const QueueState&, const QueueState&) = default;
};

struct Truncation {
    int i_max = 1;
    int j_max = 1;

    Truncation(int i_max_, int j_max_) : i_max(i_max_), j_max(j_max_) {
        if (i_max < 1 || j_max < 1)
            throw std::invalid_argument("truncation bounds must be at least 1");
    }

    // Extent needed for a geometric tail with the given ratio to drop below
    // 1e-14, padded by half again as a safety margin.
    static int tail_extent(double ratio) {
        if (ratio <= 0.0) return 8;
        if (ratio >= 1.0) return 2000;
        const double needed = std::log(1e-14) / std::log(ratio);
        return std::min(2000, static_cast<int>(std::ceil(1.5 * needed)));
    }

    // The pending count resets to zero with every block, so its tail ratio is
    // lambda_a / (lambda_a + lambda_b) and the i extent stays short. The
    // confirmed queue drains like an s-server queue, so the j extent scales
    // with the traffic intensity.
    static Truncation default_for(const SystemConfig& cfg) {
        const double pending_ratio =
            cfg.lambda_a() / (cfg.lambda_a() + cfg.lambda_b());
        const int i_max = std::max(8, tail_extent(pending_ratio));
        const int j_max =
            std::max(cfg.s() + 8, cfg.s() + tail_extent(traffic_intensity(cfg)));
        return Truncation(i_max, j_max);
    }
};

// Sparse infinitesimal generator over the truncated box, with the state
// ordering running along anti-diagonals i+j = 0, 1, 2, ... and decreasing
// i within each diagonal: (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | ...
// Transitions leaving the box are deleted and the diagonal adjusted, so
// every column sums to zero exactly (reflective cut).
class GeneratorMatrix {
  public:
    GeneratorMatrix(SystemConfig cfg, Truncation trunc)
        : cfg_(cfg), trunc_(trunc) {
        if (trunc.j_max < cfg.s())
            throw std::invalid_argument(
                "j_max must be at least s to cover the full-service region");
        enumerate_states();
        assemble();
    }

    int dimension() const { return static_cast<int>(states_.size()); }
    const std::vector<QueueState>& states() const { return states_; }
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
    const SystemConfig& config() const { return cfg_; }
    const Truncation& truncation() const { return trunc_; }

    int index_of(int i, int j) const {
        if (i < 0 || i > trunc_.i_max || j < 0 || j > trunc_.j_max)
            throw std::out_of_range("state outside truncation box");
        return index_[static_cast<std::size_t>(i) * (trunc_.j_max + 1) + j];
    }

    // Retained transitions out of a state (excluding the diagonal).
    std::vector<std::pair<QueueState, double>> transitions_from(int i, int j) const {
        std::vector<std::pair<QueueState, double>> out;
        if (i + 1 <= trunc_.i_max)
            out.push_back({{i + 1, j}, cfg_.lambda_a()});
        if (i >= 1 && i + j <= trunc_.j_max)
            out.push_back({{0, i + j}, cfg_.lambda_b()});
        if (j >= 1)
            out.push_back({{i, j - 1}, service_completion_rate(j, cfg_)});
        return out;
    }

  private:
    void enumerate_states() {
        const int n = (trunc_.i_max + 1) * (trunc_.j_max + 1);
        states_.reserve(static_cast<std::size_t>(n));
        index_.assign(static_cast<std::size_t>(n), -1);
        for (int d = 0; d <= trunc_.i_max + trunc_.j_max; ++d) {
            for (int i = std::min(d, trunc_.i_max); i >= std::max(0, d - trunc_.j_max); --i) {
                const int j = d - i;
                index_[static_cast<std::size_t>(i) * (trunc_.j_max + 1) + j] =
                    static_cast<int>(states_.size());
                states_.push_back({i, j});
            }
        }
    }

    void assemble() {
        const int n = dimension();
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(n) * 4);
        for (int col = 0; col < n; ++col) {
            const QueueState st = states_[static_cast<std::size_t>(col)];
            double outflow = 0.0;
            for (const auto& [to, rate] : transitions_from(st.i, st.j)) {
                trips.emplace_back(index_of(to.i, to.j), col, rate);
                outflow += rate;
            }
            trips.emplace_back(col, col, -outflow);
        }
        matrix_.resize(n, n);
        matrix_.setFromTriplets(trips.begin(), trips.end());
        matrix_.makeCompressed();
    }

    SystemConfig cfg_;
    Truncation trunc_;
    std::vector<QueueState> states_;
    std::vector<int> index_;
    Eigen::SparseMatrix<double> matrix_;
};

inline GeneratorMatrix build_generator(const SystemConfig& cfg, const Truncation& trunc) {
    return GeneratorMatrix(cfg, trunc);
}

struct StateDistribution {
    std::vector<QueueState> states;      // same ordering as the generator
    std::vector<double> probabilities;   // aligned with states
    Truncation truncation;
    double residual = 0.0;               // achieved ||Q w||_inf
    double boundary_mass = 0.0;          // mass on i = i_max or j = j_max

    double prob(int i, int j) const {
        for (std::size_t k = 0; k < states.size(); ++k)
            if (states[k].i == i && states[k].j == j) return probabilities[k];
        return 0.0;
    }
};

// Solve Q w = 0, 1' w = 1 by replacing the balance equation of the last
// (deepest-boundary) state with the normalization row and factoring with
// sparse LU. One step of iterative refinement is applied before checking
// the residual of the original system.
inline StateDistribution solve_steady_state(const GeneratorMatrix& gen, double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!is_stable(gen.config()))
        throw UnstableConfigError("rho >= 1: no steady state exists");

    const int n = gen.dimension();
    const Eigen::SparseMatrix<double>& Q = gen.matrix();

    // A = Q with the last row replaced by ones; b = e_last.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(Q.nonZeros()) + n);
    for (int k = 0; k < Q.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it)
            if (it.row() != n - 1)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int col = 0; col < n; ++col)
        trips.emplace_back(n - 1, col, 1.0);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw NonConvergenceError("sparse LU factorization failed");

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd w = lu.solve(b);
    // refinement: A d = b - A w
    Eigen::VectorXd r = b - A * w;
    w += lu.solve(r);

    // Clamp roundoff negatives and renormalize.
    for (int k = 0; k < n; ++k)
        if (w(k) < 0.0) w(k) = 0.0;
    const double total = w.sum();
    if (!(total > 0.0))
        throw NonConvergenceError("steady-state solve produced a zero vector");
    w /= total;

    const double residual = (Q * w).cwiseAbs().maxCoeff();
    if (residual > tol)
        throw NonConvergenceError("steady-state residual " + std::to_string(residual) +
                                  " exceeds tolerance");

    StateDistribution dist{gen.states(), {}, gen.truncation(), residual, 0.0};
    dist.probabilities.assign(w.data(), w.data() + n);
    for (int k = 0; k < n; ++k) {
        const QueueState st = dist.states[static_cast<std::size_t>(k)];
        if (st.i == gen.truncation().i_max || st.j == gen.truncation().j_max)
            dist.boundary_mass += dist.probabilities[static_cast<std::size_t>(k)];
    }
    return dist;
}

// E{N} = sum (i + j) w_ij.
inline double mean_outstanding(const StateDistribution& w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w.states.size(); ++k)
        acc += (w.states[k].i + w.states[k].j) * w.probabilities[k];
    return acc;
}

enum class LatencyForm {
    standard,  // T_a * sum (i+j) w_ij - T_c
    footnote,  // T_a * sum (i + max(j-1,0)) w_ij
};

namespace detail {

inline double latency_from_distribution(const StateDistribution& w,
                                        const ConfirmationPolicy& N,
                                        const SystemConfig& cfg,
                                        LatencyForm form) {
    double value;
    if (form == LatencyForm::standard) {
        value = cfg.mean_interarrival() * mean_outstanding(w) - cfg.mean_service_time();
    } else {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.states.size(); ++k)
            acc += (w.states[k].i + std::max(w.states[k].j - 1, 0)) * w.probabilities[k];
        value = cfg.mean_interarrival() * acc;
    }
    value += cfg.mean_block_time() * (N.n_confirmations() - 1);
    // Floating error can push near-degenerate configs slightly below zero.
    if (value < 0.0 && value > -1e-9) value = 0.0;
    return value;
}

}  // namespace detail

// Mean waiting time (stages 1-3) for N confirmations: the one-confirmation
// chain's Little's-law latency plus (N-1) mean block times. If the supplied
// truncation leaves more than 1e-8 of mass on the cut boundary, the box is
// doubled and the solve repeated before giving up.
inline double expected_latency(const ConfirmationPolicy& N,
                               const SystemConfig& cfg,
                               const Truncation& trunc,
                               double tol = 1e-10,
                               LatencyForm form = LatencyForm::standard) {
    if (!is_stable(cfg))
        throw UnstableConfigError("rho >= 1: latency diverges");
    Truncation t = trunc;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const StateDistribution w = solve_steady_state(build_generator(cfg, t), tol);
        if (w.boundary_mass <= 1e-8)
            return detail::latency_from_distribution(w, N, cfg, form);
        t = Truncation(t.i_max * 2, t.j_max * 2);
    }
    throw NonConvergenceError("boundary mass above 1e-8 even after enlarging the truncation");
}

inline double expected_latency(const ConfirmationPolicy& N, const SystemConfig& cfg) {
    return expected_latency(N, cfg, Truncation::default_for(cfg));
}

}  // namespace bran
