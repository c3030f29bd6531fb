#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "wavewidth/widths.hpp"

using namespace wavewidth;

namespace {

GramMatrix wave_grid_gram(int grid_size) {
    std::vector<WaveElement> elems;
    for (int m = 0; m < grid_size; ++m)
        elems.push_back(WaveElement::snapshot(static_cast<double>(m) / (grid_size - 1)));
    return assemble_gram(elems);
}

}  // namespace

TEST_SUITE_BEGIN("widths");

TEST_CASE("orthonormal widths in closed form") {
    CHECK(exact_width_orthonormal(2, 7) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(exact_width_orthonormal(1, 5) == 0.0);
    CHECK(exact_width_orthonormal(3, 1) == doctest::Approx(0.816496580927726).epsilon(1e-15));
    CHECK_THROWS_AS(exact_width_orthonormal(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(exact_width_orthonormal(2, 0), std::invalid_argument);
}

TEST_CASE("pairing subspaces balance the canonical residuals") {
    const Subspace one = pairing_subspace(1);
    CHECK(one.coeffs(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(one.coeffs(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(projection_residual(GramMatrix::identity(2), one, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    // Odd- and even-indexed snapshots see the same residual.
    const Subspace two = pairing_subspace(2);
    const GramMatrix id4 = GramMatrix::identity(4);
    CHECK(projection_residual(id4, two, 2) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const Subspace three = pairing_subspace(3);
    CHECK(orthonormality_defect(GramMatrix::identity(6), three) <= 1e-12);

    // Block size 3 generalization.
    const Subspace blocks = pairing_subspace(2, 3);
    const GramMatrix id6 = GramMatrix::identity(6);
    for (int k = 0; k < 6; ++k)
        CHECK(projection_residual(id6, blocks, k) ==
              doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("pigeonhole bound and degeneracy") {
    for (int n : {1, 2, 3, 5, 8})
        CHECK(pigeonhole_lower_bound(2 * n, n).value ==
              doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(pigeonhole_lower_bound(3, 1).value ==
          doctest::Approx(0.816496580927726).epsilon(1e-15));

    const PigeonholeBound degenerate = pigeonhole_lower_bound(4, 4);
    CHECK(degenerate.value == 0.0);
    CHECK(degenerate.degenerate);
    CHECK_FALSE(pigeonhole_lower_bound(5, 4).degenerate);
    CHECK_THROWS_AS(pigeonhole_lower_bound(4, 0), std::invalid_argument);
}

TEST_CASE("orthonormal exactness across the three routes") {
    for (int k : {2, 3, 4}) {
        for (int n : {1, 2, 3}) {
            const double reference = exact_width_orthonormal(k, n);
            CHECK(std::abs(pigeonhole_lower_bound(k * n, n).value - reference) <= 1e-12);
            const GramMatrix id = GramMatrix::identity(k * n);
            const double sup = sup_residual(id, pairing_subspace(n, k)).value;
            CHECK(std::abs(sup - reference) <= 1e-12);
        }
    }
}

TEST_CASE("dual lower bound certificates") {
    for (int n : {1, 2, 4}) {
        const GramMatrix id = GramMatrix::identity(2 * n);
        const std::vector<double> uniform(2 * n, 1.0 / (2 * n));
        CHECK(dual_lower_bound(id, n, uniform) ==
              doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    }

    // Past the rank the tail is empty.
    Matrix rank1(3, 3, 1.0);
    const std::vector<double> u3(3, 1.0 / 3.0);
    CHECK(dual_lower_bound(GramMatrix{rank1}, 2, u3) <= 1e-6);

    // Certified ordering against the numerical upper bound.
    const GramMatrix phi4 = wave_grid_gram(5);
    const std::vector<double> u5(5, 0.2);
    const double dual = dual_lower_bound(phi4, 2, u5);
    CHECK(dual > 0.0);
    CHECK(dual <= minimax_width(phi4, 2).upper + 1e-9);

    std::vector<double> bad = {0.5, 0.2, 0.1, 0.1, 0.2};  // sums to 1.1
    CHECK_THROWS_AS(dual_lower_bound(phi4, 2, bad), std::invalid_argument);
    bad = {1.2, -0.2, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(dual_lower_bound(phi4, 2, bad), std::invalid_argument);
    const std::vector<double> short_w(3, 1.0 / 3.0);
    CHECK_THROWS_AS(dual_lower_bound(phi4, 2, short_w), std::invalid_argument);
}

TEST_CASE("dual ascent reports weights consistent with its value") {
    const GramMatrix g = wave_grid_gram(9);
    const DualAscentResult result = ascend_dual_weights(g, 2);
    double total = 0.0;
    for (double w : result.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.value == doctest::Approx(dual_lower_bound(g, 2, result.weights)).epsilon(1e-10));
    CHECK(result.iterations > 0);
}

TEST_CASE("minimax width on small canonical sets") {
    const WidthEstimate est = minimax_width(GramMatrix::identity(2), 1);
    CHECK(std::abs(est.upper - 1.0 / std::sqrt(2.0)) <= 1e-3);
    CHECK(std::abs(est.lower_dual - 1.0 / std::sqrt(2.0)) <= 1e-3);
    CHECK(est.upper - est.lower_dual <= 2e-3);

    Matrix single(1, 1);
    single(0, 0) = 2.0;
    CHECK(minimax_width(GramMatrix{single}, 1).upper <= 1e-7);

    const GramMatrix phi8 = wave_grid_gram(9);
    CHECK(minimax_width(phi8, 4).upper >= 0.125 - 1e-12);
}

TEST_CASE("minimax invariants: ordering, witness, monotonicity") {
    const GramMatrix g = wave_grid_gram(9);
    double previous_upper = 1e300, previous_dual = 1e300;
    for (int n = 1; n <= 4; ++n) {
        const WidthEstimate est = minimax_width(g, n);
        CHECK(est.lower_dual >= 0.0);
        CHECK(std::max(est.lower_packing, est.lower_dual) <= est.upper + 1e-9);
        CHECK(est.upper == doctest::Approx(sup_residual(g, est.upper_witness).value)
                               .epsilon(1e-12));
        CHECK(est.upper <= previous_upper + 1e-9);
        CHECK(est.lower_dual <= previous_dual + 1e-9);
        previous_upper = est.upper;
        previous_dual = est.lower_dual;
    }
}

TEST_CASE("minimax bounds scale linearly with the snapshot set") {
    const GramMatrix g = wave_grid_gram(7);
    Matrix scaled_entries = g.entries;
    const double c = 3.0;
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j) scaled_entries(i, j) *= c * c;
    const GramMatrix scaled{scaled_entries};

    for (int n : {1, 2}) {
        const WidthEstimate base = minimax_width(g, n);
        const WidthEstimate big = minimax_width(scaled, n);
        CHECK(big.upper == doctest::Approx(c * base.upper).epsilon(1e-10));
        CHECK(big.lower_dual == doctest::Approx(c * base.lower_dual).epsilon(1e-10));
    }
}

TEST_CASE("minimax is deterministic for a fixed seed") {
    const GramMatrix g = wave_grid_gram(9);
    const WidthEstimate a = minimax_width(g, 2);
    const WidthEstimate b = minimax_width(g, 2);
    CHECK(a.upper == b.upper);
    CHECK(a.lower_dual == b.lower_dual);
    CHECK(a.iterations == b.iterations);

    MinimaxConfig other;
    other.seed = 7;
    const WidthEstimate c = minimax_width(g, 2, other);
    CHECK(std::max(c.lower_packing, c.lower_dual) <= c.upper + 1e-9);
}

TEST_CASE("exhausted iteration budget returns best-so-far as non-converged") {
    const GramMatrix g = wave_grid_gram(9);
    MinimaxConfig tight;
    tight.max_iterations = 3;
    tight.restarts = 2;
    const WidthEstimate est = minimax_width(g, 2, tight);
    CHECK_FALSE(est.converged);
    CHECK(est.upper > 0.0);
    CHECK(est.lower_dual <= est.upper + 1e-9);

    MinimaxConfig loose;
    loose.convergence_tol = 10.0;  // any first step satisfies it
    CHECK(minimax_width(g, 2, loose).converged);
}

TEST_CASE("minimax config validation") {
    const GramMatrix g = wave_grid_gram(5);
    MinimaxConfig cfg;
    cfg.restarts = 0;
    CHECK_THROWS_AS(minimax_width(g, 1, cfg), std::invalid_argument);
    cfg = MinimaxConfig{};
    cfg.weight_learning_rate = 11.0;
    CHECK_THROWS_AS(minimax_width(g, 1, cfg), std::invalid_argument);
    cfg = MinimaxConfig{};
    cfg.convergence_tol = 0.0;
    CHECK_THROWS_AS(minimax_width(g, 1, cfg), std::invalid_argument);
    cfg = MinimaxConfig{};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(minimax_width(g, 1, cfg), std::invalid_argument);
}

TEST_CASE("minimax matches a dense direction search in one dimension") {
    MinimaxConfig cfg;
    cfg.max_iterations = 200;  // small instances converge fast
    for (int trial = 0; trial < 3; ++trial) {
        const int s = 2 + trial;
        const GramMatrix g = testoracle::random_psd_gram(2024, trial, s);
        const double upper = minimax_width(g, 1, cfg).upper;
        const double brute = testoracle::brute_force_width_dim1(g);
        CHECK(std::abs(upper - brute) <= 1e-3);
    }
}

TEST_CASE("packing bound reproduces the closed form through the chain") {
    CHECK(packing_lower_bound(1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(packing_lower_bound(4) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(packing_lower_bound(100) == doctest::Approx(0.025).epsilon(1e-14));
    for (int n = 1; n <= 20; ++n)
        CHECK(std::abs(packing_lower_bound(n) - 0.25 / std::sqrt(static_cast<double>(n))) <=
              1e-14);
    CHECK_THROWS_AS(packing_lower_bound(0), std::invalid_argument);

    const PackingChain chain = verify_packing_chain(6);
    CHECK(chain.verified);
    CHECK(chain.gram_identity_dev <= 1e-12);
}

TEST_CASE("chain report ties the estimates to the analytic bound") {
    const ChainReport one = chain_check(2, 1);
    CHECK(one.chain_verified);
    CHECK(one.packing_value == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(one.phi_estimate.lower_packing == one.packing_value);
    CHECK(std::abs(one.psi_estimate.upper - 0.5) <= 1e-3);
    CHECK(one.phi_estimate.upper >= 0.5 * one.psi_estimate.lower_dual - 1e-9);

    const ChainReport two = chain_check(4, 2);
    CHECK(two.chain_verified);
    CHECK(two.packing_value == doctest::Approx(0.1767766953).epsilon(1e-9));

    CHECK_THROWS_AS(chain_check(3, 1), std::invalid_argument);
    CHECK_THROWS_AS(chain_check(0, 0), std::invalid_argument);
}

TEST_SUITE_END();
