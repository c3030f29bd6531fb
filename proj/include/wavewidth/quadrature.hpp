#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wavewidth {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

/// Nodes by Newton iteration on the Legendre recurrence; accurate to a few
/// ulps for the orders used here (n <= a few hundred).
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Integral of f over [a, b] with a precomputed rule.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureRule& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * s;
}

}  // namespace wavewidth
