#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "bran/ctmc.hpp"

using namespace bran;

namespace {

const SystemConfig kFig5a(0.4, 25.0, 1.0, 4);  // T_b = 0.04, rho = 0.1

// Dense least-squares solve of [Q; 1'] w = [0; 1], independent of the
// sparse LU path under test.
Eigen::VectorXd dense_oracle(const GeneratorMatrix& gen) {
    const int n = gen.dimension();
    Eigen::MatrixXd A(n + 1, n);
    A.topRows(n) = Eigen::MatrixXd(gen.matrix());
    A.row(n).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    return A.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST_CASE("generator transitions from an interior state") {
    const GeneratorMatrix gen(kFig5a, Truncation(10, 10));
    const auto trans = gen.transitions_from(2, 1);
    REQUIRE(trans.size() == 3);
    // arrival, block assembly, service completion
    CHECK(trans[0].first == QueueState{3, 1});
    CHECK(trans[0].second == Catch::Approx(0.4));
    CHECK(trans[1].first == QueueState{0, 3});
    CHECK(trans[1].second == Catch::Approx(25.0));
    CHECK(trans[2].first == QueueState{2, 0});
    CHECK(trans[2].second == Catch::Approx(1.0));
}

TEST_CASE("block generation from the empty state is a dropped self-loop") {
    const GeneratorMatrix gen(kFig5a, Truncation(10, 10));
    const auto trans = gen.transitions_from(0, 0);
    REQUIRE(trans.size() == 1);
    CHECK(trans[0].first == QueueState{1, 0});
    CHECK(trans[0].second == Catch::Approx(0.4));
}

TEST_CASE("generator columns sum to zero and off-diagonals are nonnegative") {
    const GeneratorMatrix gen(kFig5a, Truncation(20, 20));
    const auto& Q = gen.matrix();
    const Eigen::VectorXd colsums =
        Eigen::RowVectorXd::Ones(gen.dimension()) * Q;
    CHECK(colsums.cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < Q.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it)
            if (it.row() != it.col()) CHECK(it.value() >= 0.0);
}

TEST_CASE("generator rejects j_max below s") {
    CHECK_THROWS_AS(GeneratorMatrix(kFig5a, Truncation(10, 3)), std::invalid_argument);
}

TEST_CASE("anti-diagonal state ordering") {
    const GeneratorMatrix gen(kFig5a, Truncation(5, 5));
    const auto& st = gen.states();
    REQUIRE(st.size() == 36);
    CHECK(st[0] == QueueState{0, 0});
    CHECK(st[1] == QueueState{1, 0});
    CHECK(st[2] == QueueState{0, 1});
    CHECK(st[3] == QueueState{2, 0});
    CHECK(st[4] == QueueState{1, 1});
    CHECK(st[5] == QueueState{0, 2});
}

TEST_CASE("toy truncation matches dense elimination") {
    const SystemConfig cfg(0.3, 2.0, 1.0, 1);
    const GeneratorMatrix gen(cfg, Truncation(2, 2));
    const StateDistribution w = solve_steady_state(gen, 1e-10);
    const Eigen::VectorXd oracle = dense_oracle(gen);
    REQUIRE(w.probabilities.size() == 9);
    for (int k = 0; k < 9; ++k)
        CHECK(w.probabilities[static_cast<std::size_t>(k)] ==
              Catch::Approx(oracle(k)).margin(1e-12));
}

TEST_CASE("steady state postconditions on a paper configuration") {
    const StateDistribution w =
        solve_steady_state(build_generator(kFig5a, Truncation::default_for(kFig5a)));
    CHECK(w.residual <= 1e-10);
    double total = 0.0;
    for (double p : w.probabilities) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(w.boundary_mass <= 1e-8);
}

TEST_CASE("near-empty system puts almost all mass at the origin") {
    const SystemConfig cfg(1e-6, 1.0, 1.0, 4);
    const StateDistribution w =
        solve_steady_state(build_generator(cfg, Truncation(50, 50)));
    CHECK(w.probabilities[0] >= 1.0 - 1e-5);
}

TEST_CASE("low-traffic distribution concentrates near the origin") {
    const StateDistribution w =
        solve_steady_state(build_generator(kFig5a, Truncation::default_for(kFig5a)));
    double near = 0.0;
    for (std::size_t k = 0; k < w.states.size(); ++k)
        if (w.states[k].i <= 2 && w.states[k].j <= kFig5a.s() + 4)
            near += w.probabilities[k];
    CHECK(near > 0.99);
}

TEST_CASE("unstable configuration is refused") {
    const SystemConfig cfg(4.0, 25.0, 1.0, 4);  // rho = 1
    CHECK_THROWS_AS(solve_steady_state(build_generator(cfg, Truncation(20, 20))),
                    UnstableConfigError);
    CHECK_THROWS_AS(expected_latency(ConfirmationPolicy(1), cfg), UnstableConfigError);
}

TEST_CASE("mean outstanding on point masses") {
    StateDistribution w{{{0, 0}, {2, 3}}, {1.0, 0.0}, Truncation(3, 3), 0.0, 0.0};
    CHECK(mean_outstanding(w) == 0.0);
    w.probabilities = {0.0, 1.0};
    CHECK(mean_outstanding(w) == Catch::Approx(5.0));
}

TEST_CASE("each extra confirmation adds exactly one mean block time") {
    const Truncation trunc = Truncation::default_for(kFig5a);
    const double l1 = expected_latency(ConfirmationPolicy(1), kFig5a, trunc);
    const double l2 = expected_latency(ConfirmationPolicy(2), kFig5a, trunc);
    const double l5 = expected_latency(ConfirmationPolicy(5), kFig5a, trunc);
    CHECK(l2 - l1 == Catch::Approx(kFig5a.mean_block_time()).margin(1e-12));
    CHECK(l5 - l1 == Catch::Approx(4.0 * kFig5a.mean_block_time()).margin(1e-12));
}

TEST_CASE("latency is insensitive to doubling the truncation") {
    const SystemConfig cfg(2.8, 5.0, 1.0, 4);  // rho = 0.7, T_b = 0.2
    const double a = expected_latency(ConfirmationPolicy(1), cfg, Truncation(60, 60));
    const double b = expected_latency(ConfirmationPolicy(1), cfg, Truncation(120, 120));
    CHECK(std::abs(a - b) / b < 1e-3);
}

TEST_CASE("footnote latency form is close to but distinct from the main form") {
    const Truncation trunc = Truncation::default_for(kFig5a);
    const double main_form = expected_latency(ConfirmationPolicy(1), kFig5a, trunc);
    const double footnote = expected_latency(ConfirmationPolicy(1), kFig5a, trunc,
                                             1e-10, LatencyForm::footnote);
    CHECK(footnote >= 0.0);
    CHECK(std::abs(footnote - main_form) < 1.0);
}
