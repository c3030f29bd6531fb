#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "wavewidth/greedy.hpp"
#include "wavewidth/manifold.hpp"
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

TEST_SUITE_BEGIN("greedy");

TEST_CASE("orthonormal sets keep unit error until exhausted") {
    const GreedyTrace trace = strong_greedy(GramMatrix::identity(4), 2);
    REQUIRE(trace.errors.size() == 3);
    for (double e : trace.errors) CHECK(e == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(trace.selected_indices == std::vector<int>{0, 1});  // ties resolve to smallest index
}

TEST_CASE("single snapshot collapses in one step") {
    Matrix g(1, 1);
    g(0, 0) = 2.0;
    const GreedyTrace trace = strong_greedy(GramMatrix{g}, 1);
    REQUIRE(trace.errors.size() == 2);
    CHECK(trace.errors[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(trace.errors[1] <= 1e-7);  // residual floor of the deflation arithmetic
}

TEST_CASE("exhaustion drives the error to zero") {
    const GramMatrix g = wave_grid_gram(9);
    const GreedyTrace trace = strong_greedy(g, 9);
    CHECK(trace.errors.back() <= 1e-6);
    for (std::size_t i = 1; i < trace.errors.size(); ++i)
        CHECK(trace.errors[i] <= trace.errors[i - 1] + 1e-9);
    const std::set<int> unique(trace.selected_indices.begin(), trace.selected_indices.end());
    CHECK(unique.size() == trace.selected_indices.size());
}

TEST_CASE("greedy errors dominate the certified width bounds") {
    const GramMatrix g = wave_grid_gram(17);
    const GreedyTrace trace = strong_greedy(g, 8);
    REQUIRE(trace.errors.size() == 9);

    for (int n : {2, 4}) {
        const WidthEstimate est = minimax_width(g, n);
        CHECK(trace.errors[n] >= est.lower_dual - 1e-9);
    }
    // The uniform grid of 17 speeds contains the difference families for
    // these dimensions, so the packing bound applies.
    for (int n : {1, 2, 4, 8})
        CHECK(trace.errors[n] >= 0.25 / std::sqrt(static_cast<double>(n)) - 1e-9);
}

TEST_CASE("stop tolerance ends the selection early") {
    const GramMatrix g = wave_grid_gram(9);
    const GreedyTrace trace = strong_greedy(g, 8, 0.3);
    CHECK(trace.errors.back() < 0.3);
    CHECK(trace.errors.size() < 9);
    // All earlier errors were at or above the tolerance.
    for (std::size_t i = 0; i + 1 < trace.errors.size(); ++i) CHECK(trace.errors[i] >= 0.3);
}

TEST_CASE("greedy input validation") {
    const GramMatrix g = wave_grid_gram(5);
    CHECK_THROWS_AS(strong_greedy(g, 6), std::invalid_argument);
    CHECK_THROWS_AS(strong_greedy(g, -1), std::invalid_argument);
    CHECK_THROWS_AS(strong_greedy(g, 2, -1.0), std::invalid_argument);
}

TEST_CASE("decay fits recover synthetic rates exactly") {
    std::vector<double> algebraic = {1.0};  // N = 0 norm entry, skipped
    for (int n = 1; n <= 32; ++n) algebraic.push_back(0.25 / std::sqrt(static_cast<double>(n)));
    const DecayFit alg = fit_decay(algebraic, 1);
    CHECK(alg.algebraic_exponent == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(alg.algebraic_r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(alg.better_model == DecayModel::algebraic);

    std::vector<double> exponential = {1.0};
    for (int n = 1; n <= 32; ++n) exponential.push_back(std::exp(-static_cast<double>(n)));
    const DecayFit expo = fit_decay(exponential, 1);
    CHECK(expo.exponential_rate == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(expo.exponential_r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expo.better_model == DecayModel::exponential);
}

TEST_CASE("constant data fits both models perfectly and ties to algebraic") {
    const std::vector<double> constant(8, 1.0);
    const DecayFit fit = fit_decay(constant, 1);
    CHECK(fit.algebraic_r2 == 1.0);
    CHECK(fit.exponential_r2 == 1.0);
    CHECK(fit.better_model == DecayModel::algebraic);
    CHECK(fit.algebraic_exponent == 0.0);
}

TEST_CASE("decay fit window validation") {
    const std::vector<double> with_zero = {1.0, 0.5, 0.0, 0.25, 0.2, 0.1};
    CHECK_THROWS_AS(fit_decay(with_zero, 1), std::invalid_argument);
    const std::vector<double> too_short = {1.0, 0.5, 0.25, 0.12};
    CHECK_THROWS_AS(fit_decay(too_short, 1), std::invalid_argument);
    const std::vector<double> fine = {1.0, 0.5, 0.25, 0.12, 0.06};
    CHECK_THROWS_AS(fit_decay(fine, 0), std::invalid_argument);
    CHECK_NOTHROW(fit_decay(fine, 1));

    const std::vector<double> ns = {1.0, 2.0, 3.0};
    const std::vector<double> vals = {1.0, 0.5};
    CHECK_THROWS_AS(fit_decay_points(ns, vals), std::invalid_argument);
}

TEST_CASE("fit on explicit points handles sparse dimension lists") {
    const std::vector<double> ns = {1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> vals;
    for (double n : ns) vals.push_back(2.0 * std::pow(n, -1.5));
    const DecayFit fit = fit_decay_points(ns, vals);
    CHECK(fit.algebraic_exponent == doctest::Approx(-1.5).epsilon(1e-9));
    CHECK(fit.better_model == DecayModel::algebraic);
}

TEST_SUITE_END();
