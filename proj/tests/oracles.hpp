// Test-only reference computations, kept independent of the library paths
// they validate: composite-Simpson quadrature for the closed-form inner
// products and a dense direction search for one-dimensional widths.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wavewidth/wavewidth.hpp"

namespace testoracle {

template <class F>
double simpson_2d(F&& f, double a, double b, double c, double d, int n) {
    if (n % 2) ++n;
    auto w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    const double hx = (b - a) / n, hy = (d - c) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) s += w(i) * w(j) * f(a + i * hx, c + j * hy);
    return s * hx * hy / 9.0;
}

/// Integral of the product of two wave snapshots over the box. The box is
/// split into bands between consecutive jump lines x = c t; inside a band the
/// integrand is constant in x, and the band integral is (width * value),
/// integrated in t by composite Simpson (the integrand is linear in t, so the
/// rule is exact up to rounding).
inline double wave_pair_integral(double a, double b) {
    std::vector<double> slopes;
    auto add = [&](double m) {
        if (m == 0.0) {
            slopes.push_back(0.0);
        } else {
            slopes.push_back(-m);
            slopes.push_back(m);
        }
    };
    add(a);
    add(b);
    std::sort(slopes.begin(), slopes.end());
    slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());

    const wavewidth::WaveSnapshot fa(a), fb(b);
    auto band = [&](const std::function<double(double)>& lo,
                    const std::function<double(double)>& hi) {
        const int n = 16;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            const double xl = lo(t), xh = hi(t);
            if (xh <= xl) continue;
            const double xm = 0.5 * (xl + xh);
            s += w * (xh - xl) * fa.value({t, xm}) * fb.value({t, xm});
        }
        return s / (3.0 * n);
    };

    auto line = [](double c) { return [c](double t) { return c * t; }; };
    double total = band([](double) { return -1.0; }, line(slopes.front()));
    for (std::size_t i = 0; i + 1 < slopes.size(); ++i)
        total += band(line(slopes[i]), line(slopes[i + 1]));
    total += band(line(slopes.back()), [](double) { return 1.0; });
    return total;
}

/// Integral of the product of two exponential contrast snapshots over the box.
inline double smooth_pair_integral(double a, double b) {
    auto f = [&](double t, double x) { return std::exp(-(a + b) * (t + x + 2.0)); };
    return simpson_2d(f, 0.0, 1.0, -1.0, 1.0, 128);
}

/// Reference value for the weak residual of the time-frozen step profile
/// against the operator at speed mu: the time-derivative part integrates to
/// zero exactly, leaving -mu^2 * integral of u0 * dxx(test), evaluated by
/// Simpson on the two half-boxes left and right of the jump at x = 0.
inline double frozen_step_residual_reference(const wavewidth::BumpTestFunction& test, double mu) {
    const double t0 = test.center_t - test.radius_t, t1 = test.center_t + test.radius_t;
    const double x0 = test.center_x - test.radius_x, x1 = test.center_x + test.radius_x;
    auto dxx = [&](double t, double x) { return test.dxx(t, x); };
    double integral = 0.0;
    if (x0 < 0.0) {
        const double hi = std::min(x1, 0.0);
        integral += simpson_2d([&](double t, double x) { return 1.0 * dxx(t, x); }, t0, t1, x0, hi, 128);
    }
    if (x1 > 0.0) {
        const double lo = std::max(x0, 0.0);
        integral += simpson_2d([&](double t, double x) { return -1.0 * dxx(t, x); }, t0, t1, lo, x1, 128);
    }
    return -mu * mu * integral;
}

/// Dense direction search for the width of a snapshot set against
/// one-dimensional subspaces: grids the unit sphere in Gram coordinates
/// (spherical angles, antipodal half), then refines locally around the best
/// point. Supports set sizes 2..4.
inline double brute_force_width_dim1(const wavewidth::GramMatrix& g) {
    const int s = g.size();
    const double pi = 3.14159265358979323846;

    auto eval_direction = [&](const std::vector<double>& u) {
        double q = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) q += u[i] * g(i, j) * u[j];
        if (q < 1e-14 * std::max(g.trace(), 1e-300)) return 1e300;
        double worst2 = 0.0;
        for (int k = 0; k < s; ++k) {
            double c = 0.0;
            for (int i = 0; i < s; ++i) c += u[i] * g(i, k);
            worst2 = std::max(worst2, std::max(g(k, k) - c * c / q, 0.0));
        }
        return std::sqrt(worst2);
    };

    auto spherical = [&](const std::vector<double>& ang) {
        std::vector<double> u(s);
        double prod = 1.0;
        for (int d = 0; d < s - 1; ++d) {
            u[d] = prod * std::cos(ang[d]);
            prod *= std::sin(ang[d]);
        }
        u[s - 1] = prod;
        return u;
    };

    const int dims = s - 1;
    const int steps = dims == 1 ? 2000 : (dims == 2 ? 160 : 80);
    std::vector<double> ang(dims), best_ang(dims, 0.0);
    double best = 1e300;

    std::function<void(int)> scan = [&](int d) {
        if (d == dims) {
            const double v = eval_direction(spherical(ang));
            if (v < best) {
                best = v;
                best_ang = ang;
            }
            return;
        }
        for (int i = 0; i < steps; ++i) {
            ang[d] = pi * i / steps;
            scan(d + 1);
        }
    };
    scan(0);

    double window = pi / steps;
    for (int pass = 0; pass < 3; ++pass) {
        const std::vector<double> center = best_ang;
        std::function<void(int)> refine = [&](int d) {
            if (d == dims) {
                const double v = eval_direction(spherical(ang));
                if (v < best) {
                    best = v;
                    best_ang = ang;
                }
                return;
            }
            for (int i = -8; i <= 8; ++i) {
                ang[d] = center[d] + window * i / 8.0;
                refine(d + 1);
            }
        };
        refine(0);
        window /= 8.0;
    }
    return best;
}

/// Deterministic random positive semidefinite Gram (A^T A) of a given size.
inline wavewidth::GramMatrix random_psd_gram(std::uint64_t seed, std::uint64_t stream, int s) {
    wavewidth::SplitMix64 rng = wavewidth::SplitMix64::derived(seed, stream);
    wavewidth::Matrix a(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    wavewidth::Matrix g(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            double v = 0.0;
            for (int k = 0; k < s; ++k) v += a(k, i) * a(k, j);
            g(i, j) = v;
        }
    return wavewidth::GramMatrix(std::move(g));
}

}  // namespace testoracle
