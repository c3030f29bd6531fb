#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavewidth/prng.hpp"
#include "wavewidth/quadrature.hpp"

namespace wavewidth {

/// Point in the closed space-time box [0,1] x [-1,1]. All evaluators treat
/// points outside the closure as errors.
struct SpaceTimePoint {
    double t = 0.0;
    double x = 0.0;
};

inline bool in_closure(const SpaceTimePoint& p) {
    return p.t >= 0.0 && p.t <= 1.0 && p.x >= -1.0 && p.x <= 1.0;
}

inline void require_in_closure(const SpaceTimePoint& p) {
    if (!in_closure(p))
        throw std::domain_error("space-time point lies outside the closed box [0,1] x [-1,1]");
}

inline void require_speed(double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::domain_error("wave speed must lie in [0,1]");
}

/// Step initial value: +1 left of the origin, -1 at and right of it. The
/// right-closed convention here fixes the jump value on every cone line.
inline double step_initial(double x) { return x < 0.0 ? 1.0 : -1.0; }

/// Piecewise-constant solution of the interval problem at speed mu: +1 left of
/// the left characteristic x = -mu t, -1 on and right of x = mu t, 0 between.
/// Takes values in {-1, 0, 1} and has squared L2 norm 2 - mu over the box.
struct WaveSnapshot {
    double mu = 0.0;

    explicit WaveSnapshot(double speed) : mu(speed) { require_speed(mu); }

    double value(const SpaceTimePoint& p) const {
        require_in_closure(p);
        if (p.x < -mu * p.t) return 1.0;
        if (p.x >= mu * p.t) return -1.0;
        return 0.0;
    }

    double squared_norm() const { return 2.0 - mu; }
};

/// Averaged travelling-step form of the same solution. Agrees with
/// WaveSnapshot::value at every point of the closed box, including the cone
/// lines; the two code paths share nothing but step_initial.
inline double dalembert_value(double mu, const SpaceTimePoint& p) {
    require_speed(mu);
    require_in_closure(p);
    return 0.5 * (step_initial(p.x + mu * p.t) + step_initial(p.x - mu * p.t));
}

/// Heaviside step with H(0) = 1, matching the right-closed jump convention.
inline double heaviside(double y) { return y >= 0.0 ? 1.0 : 0.0; }

/// Impulse-response solution at speed mu > 0 (box-shaped, height 1/(2 mu),
/// spreading with the cone). Undefined at mu = 0.
inline double fundamental_solution(double mu, const SpaceTimePoint& p) {
    if (!(mu > 0.0)) throw std::domain_error("fundamental solution requires a positive wave speed");
    require_speed(mu);
    require_in_closure(p);
    return (heaviside(p.x + mu * p.t) - heaviside(p.x - mu * p.t)) / (2.0 * mu);
}

/// Difference of two neighbouring snapshots on the uniform speed grid
/// {m/M : 0 <= m <= M}: an indicator pair moving with the characteristics.
/// Values in {-1, 0, 1}, squared L2 norm 1/M, and pairwise orthogonal in m.
struct HatFunction {
    int grid = 1;   // M
    int index = 1;  // m, 1-based

    HatFunction(int M, int m) : grid(M), index(m) {
        if (M < 1) throw std::invalid_argument("hat grid count must be positive");
        if (m < 1 || m > M) throw std::invalid_argument("hat index must lie in 1..M");
    }

    double left_speed() const { return static_cast<double>(index - 1) / grid; }
    double right_speed() const { return static_cast<double>(index) / grid; }

    double value(const SpaceTimePoint& p) const {
        require_in_closure(p);
        const double lo = left_speed() * p.t;
        const double hi = right_speed() * p.t;
        if (p.x >= -hi && p.x < -lo) return 1.0;
        if (p.x >= lo && p.x < hi) return -1.0;
        return 0.0;
    }

    double squared_norm() const { return 1.0 / grid; }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// Exact inner product of two snapshots over the box. For speeds a <= b the
/// product is +1 outside the wider cone and 0 inside, so the integral is
/// 2 - b; validated against an independent quadrature oracle in the tests.
inline double snapshot_inner_product(double a, double b) {
    require_speed(a);
    require_speed(b);
    return 2.0 - std::max(a, b);
}

/// One scaled snapshot inside a linear combination.
struct WaveTerm {
    double coeff;
    double mu;
};

/// Finite linear combination of snapshots. This is the common currency for
/// Gram assembly: snapshots and hats convert into it, and pairings expand
/// bilinearly over the exact snapshot inner products.
class WaveElement {
public:
    WaveElement() = default;
    WaveElement(const WaveSnapshot& s) : terms_{{1.0, s.mu}} {}
    WaveElement(const HatFunction& h)
        : terms_{{1.0, h.left_speed()}, {-1.0, h.right_speed()}} {}

    static WaveElement snapshot(double mu) { return WaveElement(WaveSnapshot(mu)); }
    static WaveElement hat(int M, int m) { return WaveElement(HatFunction(M, m)); }
    /// sqrt(M) times the hat: unit L2 norm, orthonormal across m.
    static WaveElement scaled_hat(int M, int m) {
        WaveElement e = hat(M, m);
        e *= std::sqrt(static_cast<double>(M));
        return e;
    }

    const std::vector<WaveTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double value(const SpaceTimePoint& p) const {
        require_in_closure(p);
        double s = 0.0;
        for (const auto& term : terms_) s += term.coeff * WaveSnapshot(term.mu).value(p);
        return s;
    }

    WaveElement& operator*=(double c) {
        for (auto& term : terms_) term.coeff *= c;
        return *this;
    }

    WaveElement& operator+=(const WaveElement& other) {
        for (const auto& term : other.terms_) add_term(term);
        return *this;
    }

    WaveElement& operator-=(const WaveElement& other) {
        for (const auto& term : other.terms_) add_term({-term.coeff, term.mu});
        return *this;
    }

    friend WaveElement operator*(double c, WaveElement e) {
        e *= c;
        return e;
    }
    friend WaveElement operator+(WaveElement a, const WaveElement& b) {
        a += b;
        return a;
    }
    friend WaveElement operator-(WaveElement a, const WaveElement& b) {
        a -= b;
        return a;
    }

private:
    void add_term(const WaveTerm& term) {
        for (auto& existing : terms_) {
            if (existing.mu == term.mu) {
                existing.coeff += term.coeff;
                return;
            }
        }
        terms_.push_back(term);
    }

    std::vector<WaveTerm> terms_;
};

/// Bilinear expansion over the exact snapshot pairings.
inline double inner_product(const WaveElement& f, const WaveElement& g) {
    double acc = 0.0;
    for (const auto& tf : f.terms()) {
        double row = 0.0;
        for (const auto& tg : g.terms()) row += tg.coeff * snapshot_inner_product(tf.mu, tg.mu);
        acc += tf.coeff * row;
    }
    return acc;
}

inline std::string label(const WaveElement& e) {
    if (e.terms().size() == 1 && e.terms()[0].coeff == 1.0)
        return "phi(" + detail::format_double(e.terms()[0].mu) + ")";
    std::string s = "combo[";
    bool first = true;
    for (const auto& term : e.terms()) {
        if (!first) s += ", ";
        first = false;
        s += detail::format_double(term.coeff) + "*phi(" + detail::format_double(term.mu) + ")";
    }
    return s + "]";
}

/// Product bump test function: infinitely differentiable, compactly supported
/// in the open rectangle center +- radius, peak value `amplitude` at the
/// center. The support must lie strictly inside the box with t > 0.
struct BumpTestFunction {
    double center_t;
    double center_x;
    double radius_t;
    double radius_x;
    double amplitude = 1.0;

    BumpTestFunction(double ct, double cx, double rt, double rx, double amp = 1.0)
        : center_t(ct), center_x(cx), radius_t(rt), radius_x(rx), amplitude(amp) {
        if (!(rt > 0.0 && rx > 0.0)) throw std::invalid_argument("bump radii must be positive");
        if (!(ct - rt > 0.0 && ct + rt < 1.0 && cx - rx > -1.0 && cx + rx < 1.0))
            throw std::invalid_argument(
                "bump support must lie strictly inside (0,1) x (-1,1)");
    }

    /// 1-D profile exp(1 - 1/(1 - s^2)) on (-1,1), zero outside; peak 1 at 0.
    static double profile(double s) {
        if (std::abs(s) >= 1.0) return 0.0;
        const double u = 1.0 - s * s;
        return std::exp(1.0 - 1.0 / u);
    }

    static double profile_second_derivative(double s) {
        if (std::abs(s) >= 1.0) return 0.0;
        const double u = 1.0 - s * s;
        const double u2 = u * u;
        const double gp = -2.0 * s / u2;                      // first log-derivative
        const double gpp = -2.0 / u2 - 8.0 * s * s / (u2 * u);  // second log-derivative
        return profile(s) * (gp * gp + gpp);
    }

    double value(double t, double x) const {
        return amplitude * profile((t - center_t) / radius_t) * profile((x - center_x) / radius_x);
    }

    double dtt(double t, double x) const {
        return amplitude / (radius_t * radius_t) *
               profile_second_derivative((t - center_t) / radius_t) *
               profile((x - center_x) / radius_x);
    }

    double dxx(double t, double x) const {
        return amplitude / (radius_x * radius_x) * profile((t - center_t) / radius_t) *
               profile_second_derivative((x - center_x) / radius_x);
    }
};

namespace detail {

/// Slopes of the jump lines x = c t of a snapshot. A zero-speed snapshot
/// jumps along x = 0 for every t.
inline std::vector<double> jump_slopes(double mu) {
    if (mu == 0.0) return {0.0};
    return {-mu, mu};
}

}  // namespace detail

/// Pairing of a snapshot against the wave operator applied to a smooth test
/// function, integrated over the test support. The support box is cut along
/// the snapshot's jump lines (in t where a line crosses a box edge, in x at
/// the line itself) so every quadrature cell sees a smooth integrand, and
/// each axis is additionally split at the bump's center line so that every
/// panel contains at most one of the flat edge layers of the profile; the
/// requested number of Gauss-Legendre points is used per axis per piece.
/// Vanishes as quadrature refines when f solves the equation at speed mu.
inline double weak_residual(const WaveSnapshot& f, const BumpTestFunction& test, double mu,
                            int points_per_axis) {
    require_speed(mu);
    if (points_per_axis < 8)
        throw std::invalid_argument("weak residual needs at least 8 quadrature points per axis");

    const QuadratureRule rule = gauss_legendre(points_per_axis);
    const double t0 = test.center_t - test.radius_t, t1 = test.center_t + test.radius_t;
    const double x0 = test.center_x - test.radius_x, x1 = test.center_x + test.radius_x;
    const std::vector<double> slopes = detail::jump_slopes(f.mu);

    std::vector<double> tcuts = {t0, test.center_t, t1};
    for (double c : slopes) {
        if (c == 0.0) continue;
        for (double edge : {x0, x1}) {
            const double ts = edge / c;
            if (ts > t0 && ts < t1) tcuts.push_back(ts);
        }
    }
    std::sort(tcuts.begin(), tcuts.end());
    tcuts.erase(std::unique(tcuts.begin(), tcuts.end()), tcuts.end());

    const double mu2 = mu * mu;
    double total = 0.0;
    std::vector<double> xcuts;
    for (std::size_t seg = 0; seg + 1 < tcuts.size(); ++seg) {
        const double ta = tcuts[seg], tb = tcuts[seg + 1];
        const double t_half = 0.5 * (tb - ta), t_mid = 0.5 * (ta + tb);
        for (int it = 0; it < rule.size(); ++it) {
            const double t = t_mid + t_half * rule.nodes[it];
            const double wt = t_half * rule.weights[it];
            xcuts.assign({x0, test.center_x, x1});
            for (double c : slopes) {
                const double xc = c * t;
                if (xc > x0 && xc < x1) xcuts.push_back(xc);
            }
            std::sort(xcuts.begin(), xcuts.end());
            for (std::size_t piece = 0; piece + 1 < xcuts.size(); ++piece) {
                const double xa = xcuts[piece], xb = xcuts[piece + 1];
                if (xb <= xa) continue;
                const double x_half = 0.5 * (xb - xa), x_mid = 0.5 * (xa + xb);
                for (int ix = 0; ix < rule.size(); ++ix) {
                    const double x = x_mid + x_half * rule.nodes[ix];
                    const double wx = x_half * rule.weights[ix];
                    total += wt * wx * f.value({t, x}) * (test.dtt(t, x) - mu2 * test.dxx(t, x));
                }
            }
        }
    }
    return total;
}

/// Deterministic sampler for residual studies: a bump whose support lies
/// strictly inside the box with a small safety margin.
inline BumpTestFunction sample_interior_bump(SplitMix64& rng) {
    const double rt = rng.uniform(0.05, 0.25);
    const double rx = rng.uniform(0.05, 0.25);
    const double margin = 0.02;
    const double ct = rng.uniform(rt + margin, 1.0 - rt - margin);
    const double cx = rng.uniform(-1.0 + rx + margin, 1.0 - rx - margin);
    return BumpTestFunction(ct, cx, rt, rx);
}

}  // namespace wavewidth
