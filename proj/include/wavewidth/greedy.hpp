#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wavewidth/geometry.hpp"

namespace wavewidth {

/// Record of a greedy reduced-basis run: the selection order and the worst
/// residual after each selection (entry 0 is the largest norm, before any
/// selection). Errors are non-increasing.
struct GreedyTrace {
    std::vector<int> selected_indices;
    std::vector<double> errors;
    int n_max = 0;
};

/// Strong greedy selection: at every step pick the snapshot with the largest
/// exact projection residual (ties to the smallest index), orthonormalize it
/// against the selected basis in the G-inner product, and record the new
/// worst residual. Stops at n_max selections, once the worst residual drops
/// below stop_tol, or on numerical breakdown (residual below 1e-12).
inline GreedyTrace strong_greedy(const GramMatrix& g, int n_max, double stop_tol = 0.0) {
    const int s = g.size();
    if (n_max < 0 || n_max > s)
        throw std::invalid_argument("greedy selection budget must lie in [0, set size]");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("greedy stop tolerance must be nonnegative");

    GreedyTrace trace;
    trace.n_max = n_max;

    // Squared residuals, updated as sum-of-squares deflation per new basis
    // vector; clamped at zero against round-off.
    std::vector<double> r2(s);
    for (int k = 0; k < s; ++k) r2[k] = std::max(g(k, k), 0.0);

    std::vector<std::vector<double>> basis;
    auto record_sup = [&]() -> std::pair<double, int> {
        int arg = 0;
        for (int k = 1; k < s; ++k)
            if (r2[k] > r2[arg]) arg = k;
        const double sup = std::sqrt(std::max(r2[arg], 0.0));
        trace.errors.push_back(sup);
        return {sup, arg};
    };

    auto [sup, arg] = record_sup();
    while (static_cast<int>(trace.selected_indices.size()) < n_max) {
        if (sup < std::max(stop_tol, 1e-12)) break;

        // Orthonormalize the selected snapshot against the basis (two passes).
        std::vector<double> v(s, 0.0);
        v[arg] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                const double c = g_dot(g, b, v);
                for (int i = 0; i < s; ++i) v[i] -= c * b[i];
            }
        }
        const double norm = std::sqrt(detail::g_norm_squared(g, v));
        if (norm < 1e-12) break;  // numerical breakdown: treated as converged
        for (double& vi : v) vi /= norm;

        trace.selected_indices.push_back(arg);
        // Deflate every squared residual by the new component.
        for (int k = 0; k < s; ++k) {
            double c = 0.0;
            for (int i = 0; i < s; ++i) c += v[i] * g(i, k);
            r2[k] = std::max(r2[k] - c * c, 0.0);
        }
        basis.push_back(std::move(v));
        std::tie(sup, arg) = record_sup();
    }
    return trace;
}

enum class DecayModel { algebraic, exponential };

inline std::string to_string(DecayModel m) {
    return m == DecayModel::algebraic ? "algebraic" : "exponential";
}

/// Least-squares comparison of an algebraic model log e = a log N + c against
/// an exponential model log e = b N + c on an error sequence; the fitted
/// slopes are the decay exponent and rate, and the better model is the one
/// with the larger coefficient of determination.
struct DecayFit {
    double algebraic_exponent = 0.0;
    double algebraic_r2 = 0.0;
    double exponential_rate = 0.0;
    double exponential_r2 = 0.0;
    DecayModel better_model = DecayModel::algebraic;
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double r2 = 1.0;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    if (sxx <= 0.0) return fit;  // degenerate abscissa: slope 0
    fit.slope = sxy / sxx;
    if (syy <= 1e-300) {
        fit.r2 = 1.0;  // constant data is reproduced exactly
        return fit;
    }
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r2 = std::min(std::max(1.0 - ss_res / syy, 0.0), 1.0);
    return fit;
}

}  // namespace detail

/// Fit on explicit (N, value) pairs; every value must be positive and every
/// N at least one.
inline DecayFit fit_decay_points(std::span<const double> n_values,
                                 std::span<const double> values) {
    if (n_values.size() != values.size())
        throw std::invalid_argument("decay fit needs matching abscissae and values");
    if (n_values.size() < 4)
        throw std::invalid_argument("decay fit needs at least 4 entries");
    std::vector<double> log_n(n_values.size()), lin_n(n_values.size()), log_v(values.size());
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (!(n_values[i] >= 1.0))
            throw std::invalid_argument("decay fit abscissae must be at least 1");
        if (!(values[i] > 0.0))
            throw std::invalid_argument("decay fit window must contain positive errors");
        log_n[i] = std::log(n_values[i]);
        lin_n[i] = n_values[i];
        log_v[i] = std::log(values[i]);
    }
    const detail::LineFit alg = detail::least_squares_line(log_n, log_v);
    const detail::LineFit expo = detail::least_squares_line(lin_n, log_v);
    DecayFit fit;
    fit.algebraic_exponent = alg.slope;
    fit.algebraic_r2 = alg.r2;
    fit.exponential_rate = expo.slope;
    fit.exponential_r2 = expo.r2;
    fit.better_model = alg.r2 >= expo.r2 ? DecayModel::algebraic : DecayModel::exponential;
    return fit;
}

/// Fit on a greedy-style error sequence where errors[i] belongs to N = i.
/// The first skip_first entries are dropped; the default skips only the
/// N = 0 norm entry.
inline DecayFit fit_decay(std::span<const double> errors, int skip_first = 1) {
    if (skip_first < 1)
        throw std::invalid_argument("decay fit window must start at N >= 1");
    if (static_cast<int>(errors.size()) - skip_first < 4)
        throw std::invalid_argument("decay fit needs at least 4 entries after skipping");
    std::vector<double> ns, vals;
    for (int i = skip_first; i < static_cast<int>(errors.size()); ++i) {
        ns.push_back(static_cast<double>(i));
        vals.push_back(errors[i]);
    }
    return fit_decay_points(ns, vals);
}

}  // namespace wavewidth
