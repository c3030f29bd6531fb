#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "wavewidth/geometry.hpp"
#include "wavewidth/manifold.hpp"
#include "wavewidth/prng.hpp"

namespace wavewidth {

struct MinimaxConfig {
    int restarts = 8;
    int max_iterations = 500;
    double weight_learning_rate = 1.0;
    double convergence_tol = 1e-8;
    std::uint64_t seed = 42;

    void validate() const {
        if (restarts < 1) throw std::invalid_argument("minimax needs at least one restart");
        if (max_iterations < 1) throw std::invalid_argument("minimax needs a positive iteration budget");
        if (!(weight_learning_rate > 0.0 && weight_learning_rate <= 10.0))
            throw std::invalid_argument("weight learning rate must lie in (0, 10]");
        if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence tolerance must be positive");
    }
};

/// Width estimate for one subspace dimension: certified lower bounds, a
/// numerical upper bound with its witness subspace, and iteration bookkeeping.
struct WidthEstimate {
    int subspace_dim = 0;
    double lower_packing = 0.0;  // filled by callers where the packing chain applies
    double lower_dual = 0.0;
    double upper = 0.0;
    Subspace upper_witness;
    int iterations = 0;
    bool converged = false;
};

/// Width of kN orthonormal elements against the best N-dimensional subspace:
/// sqrt((k-1)/k). Holds for any orthonormal set of that size in a Hilbert
/// space, since widths only see the span's inner-product structure.
inline double exact_width_orthonormal(int k, int n) {
    if (k < 1) throw std::invalid_argument("block size k must be positive");
    if (n < 1) throw std::invalid_argument("subspace dimension must be positive");
    return std::sqrt((k - 1.0) / static_cast<double>(k));
}

/// Optimal subspace for kN orthonormal elements (identity Gram): column j
/// averages block j of k consecutive directions with coefficient 1/sqrt(k),
/// balancing every residual at sqrt((k-1)/k).
inline Subspace pairing_subspace(int n, int k = 2) {
    if (n < 1) throw std::invalid_argument("subspace dimension must be positive");
    if (k < 1) throw std::invalid_argument("block size k must be positive");
    Matrix b(k * n, n);
    const double c = 1.0 / std::sqrt(static_cast<double>(k));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) b(k * j + i, j) = c;
    return Subspace{b};
}

struct PigeonholeBound {
    double value = 0.0;
    bool degenerate = false;  // set size too small for a nontrivial bound
};

/// For any N-dimensional subspace and S orthonormal elements, the projector
/// diagonals sum to at most N, so some element keeps residual at least
/// sqrt(1 - N/S). Degenerates to zero once the set can be fully spanned.
inline PigeonholeBound pigeonhole_lower_bound(int set_size, int n) {
    if (n < 1) throw std::invalid_argument("subspace dimension must be positive");
    if (set_size < 1) throw std::invalid_argument("set size must be positive");
    if (set_size <= n) return {0.0, true};
    return {std::sqrt(1.0 - static_cast<double>(n) / set_size), false};
}

namespace detail {

/// Weighted Gram sqrt(D) G sqrt(D) for a nonnegative weight vector that is
/// normalized to sum one internally.
inline Matrix weighted_gram(const GramMatrix& g, std::span<const double> weights,
                            std::vector<double>& sqrt_weights_out) {
    const int s = g.size();
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights must not all vanish");
    sqrt_weights_out.resize(s);
    for (int i = 0; i < s; ++i) sqrt_weights_out[i] = std::sqrt(weights[i] / total);
    Matrix m(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) m(i, j) = sqrt_weights_out[i] * sqrt_weights_out[j] * g(i, j);
    return m;
}

/// Square root of the eigenvalue tail past position n. Eigenvalues below
/// 1e-13 of the top one are treated as solver noise, which keeps the dual
/// certificate from exceeding the verified upper bound when the true width
/// sits at machine level.
inline double dual_tail(const SpectralDecomposition& eig, int n) {
    const int s = static_cast<int>(eig.eigenvalues.size());
    if (n >= s) return 0.0;
    const double noise = 1e-13 * std::max(eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0], 0.0);
    double tail = 0.0;
    for (int j = std::max(n, 0); j < s; ++j)
        if (eig.eigenvalues[j] > noise) tail += eig.eigenvalues[j];
    return std::sqrt(std::max(tail, 0.0));
}

}  // namespace detail

/// Certified lower bound on the width of the snapshot set for any probability
/// weights: the worst residual dominates the weighted mean square residual,
/// whose minimum over N-dimensional subspaces is the tail eigenvalue mass of
/// the weighted Gram.
inline double dual_lower_bound(const GramMatrix& g, int n, std::span<const double> weights) {
    if (n < 0) throw std::invalid_argument("subspace dimension must be nonnegative");
    if (static_cast<int>(weights.size()) != g.size())
        throw std::invalid_argument("weight count must match Gram size");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("weights must form a probability vector");
    std::vector<double> sq;
    const Matrix weighted = detail::weighted_gram(g, weights, sq);
    return detail::dual_tail(symmetric_eig(weighted), n);
}

namespace detail {

struct MinimaxRun {
    double upper = std::numeric_limits<double>::infinity();
    Subspace witness;
    double dual = 0.0;
    std::vector<double> dual_weights;
    int iterations = 0;
    bool converged = true;
};

/// Candidate that mixes consecutive eigendirections of the weighted Gram in
/// pairs. On (near-)degenerate spectra such as identity-like Grams, plain
/// weighted-POD columns stay axis-aligned and their worst residual stalls at
/// the largest norm; the paired mixing balances the residuals instead.
inline Subspace paired_eig_subspace(const GramMatrix& g, const std::vector<double>& sq,
                                    const SpectralDecomposition& eig, int n) {
    const int s = g.size();
    const double noise = 1e-13 * std::max(eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0], 0.0);
    std::vector<std::vector<double>> cols;
    for (int j = 0; j < n; ++j) {
        const int a = 2 * j, b = 2 * j + 1;
        std::vector<double> col(s, 0.0);
        if (b < s && eig.eigenvalues[a] > noise && eig.eigenvalues[b] > noise) {
            const double inv = 1.0 / std::sqrt(eig.eigenvalues[a] + eig.eigenvalues[b]);
            for (int i = 0; i < s; ++i)
                col[i] = sq[i] * (eig.eigenvectors(i, a) + eig.eigenvectors(i, b)) * inv;
        } else if (a < s && eig.eigenvalues[a] > noise) {
            const double inv = 1.0 / std::sqrt(eig.eigenvalues[a]);
            for (int i = 0; i < s; ++i) col[i] = sq[i] * eig.eigenvectors(i, a) * inv;
        } else {
            break;
        }
        cols.push_back(std::move(col));
    }
    // Exactly G-orthonormal by construction: the blocks combine disjoint
    // eigendirections, normalized by the eigenvalue sums.
    return Subspace{Matrix::from_cols(s, cols)};
}

inline double sup_residual_unchecked(const GramMatrix& g, const Subspace& sub) {
    double sup = 0.0;
    for (int k = 0; k < g.size(); ++k)
        sup = std::max(sup, residual_unchecked(g, sub, k));
    return sup;
}

/// Deterministic local polish of the best subspace. Each round builds the
/// G-normalized residual direction d of the worst snapshot (G-orthogonal to
/// the span, so rotating any single column toward it preserves
/// orthonormality) and minimizes the worst residual over the rotation angle
/// exactly: with u_k(theta) = c_k cos(theta) + q_k sin(theta) the residual
/// curves are r_k^2 = a_k - u_k^2, and the minimum of their upper envelope
/// sits either at a curve's own minimum or at a crossing of two curves, both
/// available in closed form through the double-angle representation of u_k^2.
/// Stops once no rotation improves, or once the residual direction can no
/// longer be resolved in coordinate arithmetic.
inline void refine_exchange(const GramMatrix& g, Subspace& sub, double& sup_value) {
    const int s = g.size();
    const int n = sub.dim();
    const double pi = 3.14159265358979323846;
    const int max_rounds = 60;

    // Folds an angle into (-pi/2, pi/2]; u_k^2 has period pi.
    auto fold = [&](double theta) {
        while (theta > 0.5 * pi) theta -= pi;
        while (theta <= -0.5 * pi) theta += pi;
        return theta;
    };

    for (int round = 0; round < max_rounds; ++round) {
        std::vector<double> resid2(s);
        Matrix coef(n, s);  // coef(j, k) = <x_k, b_j>_G
        for (int k = 0; k < s; ++k) {
            double r2 = g(k, k);
            for (int j = 0; j < n; ++j) {
                double c = 0.0;
                for (int i = 0; i < s; ++i) c += sub.coeffs(i, j) * g(i, k);
                coef(j, k) = c;
                r2 -= c * c;
            }
            resid2[k] = std::max(r2, 0.0);
        }
        int worst = 0, second = -1;
        for (int k = 1; k < s; ++k)
            if (resid2[k] > resid2[worst]) worst = k;
        for (int k = 0; k < s; ++k)
            if (k != worst && (second < 0 || resid2[k] > resid2[second])) second = k;
        const double worst_r = std::sqrt(resid2[worst]);
        if (worst_r <= 1e-12) break;

        // Candidate rotation targets: the G-normalized residual directions of
        // the two worst snapshots, plus blends of the two. Blends matter at
        // balanced stalls, where the two worst residuals tie and a rotation
        // toward either one alone raises the other.
        std::vector<std::vector<double>> directions;
        {
            std::vector<std::vector<double>> pure;
            for (int target : {worst, second}) {
                if (target < 0) continue;
                const double target_r = std::sqrt(resid2[target]);
                if (target_r <= 1e-12) continue;
                std::vector<double> dir(s, 0.0);
                dir[target] = 1.0;
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < s; ++i) dir[i] -= coef(j, target) * sub.coeffs(i, j);
                const double dnorm2 = g_dot(g, dir, dir);
                if (!(dnorm2 > 0.0)) continue;
                const double dnorm = std::sqrt(dnorm2);
                if (std::abs(dnorm - target_r) > 0.05 * target_r) continue;
                for (double& di : dir) di /= dnorm;
                pure.push_back(std::move(dir));
            }
            directions = pure;
            if (pure.size() == 2) {
                for (int step = 1; step <= 7; ++step) {
                    const double phi = pi * step / 16.0;  // (0, pi/2) interior blends
                    for (int sign : {1, -1}) {
                        std::vector<double> dir(s);
                        const double ca = std::cos(phi), sb = sign * std::sin(phi);
                        for (int i = 0; i < s; ++i) dir[i] = ca * pure[0][i] + sb * pure[1][i];
                        const double dnorm2 = g_dot(g, dir, dir);
                        if (!(dnorm2 > 1e-24)) continue;
                        const double inv = 1.0 / std::sqrt(dnorm2);
                        for (double& di : dir) di *= inv;
                        directions.push_back(std::move(dir));
                    }
                }
            }
        }

        int best_col = -1;
        double best_theta = 0.0, best_sup2 = resid2[worst];
        std::vector<double> best_dir;
        std::vector<double> q(s), base(s), candidates;
        for (const std::vector<double>& d : directions) {

            for (int k = 0; k < s; ++k) {  // q_k = <x_k, d>_G
                double v = 0.0;
                for (int i = 0; i < s; ++i) v += d[i] * g(i, k);
                q[k] = v;
            }

            for (int j = 0; j < n; ++j) {
                // a_k: residual part not affected by rotating column j.
                for (int k = 0; k < s; ++k) base[k] = resid2[k] + coef(j, k) * coef(j, k);

                candidates.clear();
                candidates.push_back(0.5 * pi);
                for (int k = 0; k < s; ++k)
                    candidates.push_back(fold(std::atan2(q[k], coef(j, k))));
                for (int k = 0; k < s; ++k) {
                    const double ck = coef(j, k), qk = q[k];
                    for (int l = k + 1; l < s; ++l) {
                        const double cl = coef(j, l), ql = q[l];
                        const double alpha = 0.5 * ((ck * ck - qk * qk) - (cl * cl - ql * ql));
                        const double beta = ck * qk - cl * ql;
                        const double gamma = 0.5 * ((ck * ck + qk * qk) - (cl * cl + ql * ql));
                        const double rhs = (base[k] - base[l]) - gamma;
                        const double radius = std::hypot(alpha, beta);
                        if (radius < 1e-300 || std::abs(rhs) > radius) continue;
                        const double phi = std::atan2(beta, alpha);
                        const double delta =
                            std::acos(std::min(std::max(rhs / radius, -1.0), 1.0));
                        candidates.push_back(fold(0.5 * (phi + delta)));
                        candidates.push_back(fold(0.5 * (phi - delta)));
                    }
                }

                for (double theta : candidates) {
                    const double ct = std::cos(theta), st = std::sin(theta);
                    double sup2 = 0.0;
                    for (int k = 0; k < s; ++k) {
                        const double u = ct * coef(j, k) + st * q[k];
                        sup2 = std::max(sup2, base[k] - u * u);
                        if (sup2 >= best_sup2) break;
                    }
                    if (sup2 < best_sup2 - 1e-15) {
                        best_sup2 = sup2;
                        best_col = j;
                        best_theta = theta;
                        best_dir = d;
                    }
                }
            }
        }
        if (best_col < 0) break;

        const double ct = std::cos(best_theta), st = std::sin(best_theta);
        const std::vector<double> saved = sub.coeffs.col(best_col);
        for (int i = 0; i < s; ++i) sub.coeffs(i, best_col) = ct * saved[i] + st * best_dir[i];
        const double applied = sup_residual_unchecked(g, sub);
        if (applied >= sup_value) {  // predicted gain lost to round-off
            sub.coeffs.set_col(best_col, saved);
            break;
        }
        sup_value = applied;
    }
}

inline std::vector<double> dirichlet_weights(SplitMix64& rng, int s) {
    std::vector<double> w(s);
    double total = 0.0;
    for (int i = 0; i < s; ++i) {
        double e = -std::log(1.0 - rng.uniform());
        if (!(e > 0.0)) e = 1e-12;
        w[i] = e;
        total += e;
    }
    for (double& wi : w) wi /= total;
    return w;
}

/// Shared engine for the dual ascent and the full minimax estimate.
/// Multiplicative-weights ascent over snapshot weights, with the subspace
/// re-solved each iteration as the weighted-POD subspace; every subspace met
/// along the way is a feasible upper-bound candidate. The reported dual value
/// is the best one found over all visited weights. Restart r draws its
/// starting weights from an independent stream derived from (seed, r), so the
/// result does not depend on evaluation order. The weight step is normalized
/// by the largest squared snapshot norm, which makes the whole iteration
/// invariant under rescaling the snapshot set.
inline MinimaxRun run_minimax(const GramMatrix& g, int n, const MinimaxConfig& cfg,
                              bool polish_upper) {
    cfg.validate();
    if (n < 0) throw std::invalid_argument("subspace dimension must be nonnegative");
    const int s = g.size();

    MinimaxRun out;
    out.dual_weights.assign(s, 1.0 / s);

    double scale = 0.0;
    for (int i = 0; i < s; ++i) scale = std::max(scale, g(i, i));
    if (!(scale > 0.0)) {
        out.upper = 0.0;
        out.witness = Subspace{Matrix(s, 0)};
        return out;
    }

    // Internal candidates are G-orthonormal by construction and evaluated
    // without the contract check; a candidate only becomes the reported
    // witness if it also passes the public contract.
    auto merge_global = [&](double sup, const Subspace& cand) {
        if (sup < out.upper && orthonormality_defect(g, cand) <= kResidualContractTol) {
            out.upper = sup;
            out.witness = cand;
        }
    };

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        SplitMix64 rng = SplitMix64::derived(cfg.seed, static_cast<std::uint64_t>(restart));
        std::vector<double> w(s, 1.0 / s);
        if (restart > 0) w = dirichlet_weights(rng, s);
        std::vector<double> prev = w;
        bool reached_tol = false;

        double restart_upper = std::numeric_limits<double>::infinity();
        Subspace restart_witness;
        auto consider = [&](const Subspace& cand) -> std::vector<double> {
            std::vector<double> resid(s);
            for (int k = 0; k < s; ++k) resid[k] = residual_unchecked(g, cand, k);
            double sup = 0.0;
            for (double r : resid) sup = std::max(sup, r);
            if (sup < restart_upper) {
                restart_upper = sup;
                restart_witness = cand;
            }
            return resid;
        };

        for (int iter = 0; iter < cfg.max_iterations; ++iter) {
            ++out.iterations;
            std::vector<double> sq;
            const Matrix weighted = weighted_gram(g, w, sq);
            const SpectralDecomposition eig = symmetric_eig(weighted);

            const double dual = dual_tail(eig, n);
            if (dual > out.dual) {
                out.dual = dual;
                out.dual_weights = w;
            }

            const Subspace cand = subspace_from_weighted_eig(g, sq, eig, n);
            const std::vector<double> resid = consider(cand);
            if (n >= 1) consider(paired_eig_subspace(g, sq, eig, n));

            double top = 0.0;
            for (double r : resid) top = std::max(top, r * r);
            double total = 0.0;
            for (int k = 0; k < s; ++k) {
                w[k] *= std::exp(cfg.weight_learning_rate * (resid[k] * resid[k] - top) / scale);
                total += w[k];
            }
            if (!(total > 0.0)) {
                w.assign(s, 1.0 / s);
                total = 1.0;
            } else {
                for (double& wk : w) wk /= total;
            }

            double change = 0.0;
            for (int k = 0; k < s; ++k) change += std::abs(w[k] - prev[k]);
            if (change < cfg.convergence_tol) {
                reached_tol = true;
                break;
            }
            prev = w;
        }
        if (!reached_tol) out.converged = false;

        if (restart_witness.ambient_size() == s) {
            merge_global(restart_upper, restart_witness);
            // Polishing each restart's best candidate gives the exchange
            // descent several distinct starting basins.
            if (polish_upper && n >= 1 && restart_witness.dim() >= 1) {
                refine_exchange(g, restart_witness, restart_upper);
                merge_global(restart_upper, restart_witness);
            }
        }
    }

    // Re-evaluate so the reported bound is exactly the witness's residual,
    // then keep the certificate pair ordered under round-off at width ~ 0.
    out.upper = sup_residual(g, out.witness).value;
    out.dual = std::min(out.dual, out.upper);
    return out;
}

}  // namespace detail

struct DualAscentResult {
    double value = 0.0;
    std::vector<double> weights;
    int iterations = 0;
    bool converged = false;
};

/// Best-found variant of the dual bound: ascends over probability weights and
/// returns the largest certified value together with the weights achieving it.
inline DualAscentResult ascend_dual_weights(const GramMatrix& g, int n,
                                            const MinimaxConfig& cfg = {}) {
    const detail::MinimaxRun run = detail::run_minimax(g, n, cfg, false);
    return {run.dual, run.dual_weights, run.iterations, run.converged};
}

/// Numerical width estimate: upper bound from the best feasible subspace met
/// during the weight ascent (POD start, weighted-POD re-solves, paired
/// eigendirection candidates, restarts, exchange-rotation polish), dual lower
/// bound from the best visited weights. Deterministic for a fixed seed; the
/// converged flag reports whether every restart reached the weight-change
/// tolerance inside the iteration budget.
inline WidthEstimate minimax_width(const GramMatrix& g, int n, const MinimaxConfig& cfg = {}) {
    const detail::MinimaxRun run = detail::run_minimax(g, n, cfg, true);
    WidthEstimate est;
    est.subspace_dim = n;
    est.lower_packing = 0.0;
    est.lower_dual = run.dual;
    est.upper = run.upper;
    est.upper_witness = run.witness;
    est.iterations = run.iterations;
    est.converged = run.converged;
    return est;
}

struct PackingChain {
    double value = 0.0;
    double gram_identity_dev = 0.0;  // max |Gram(scaled hats) - I|
    bool verified = false;
};

namespace detail {

/// The quarter-inverse-sqrt bound assembled step by step: build the 2N scaled
/// hats (an orthonormal family inside differences of snapshots), take the
/// exact orthonormal width 1/sqrt(2), undo the sqrt(2N) scaling, and halve
/// for the difference construction. Verified against 0.25/sqrt(N).
inline PackingChain packing_chain(int n) {
    if (n < 1) throw std::invalid_argument("packing bound needs a positive subspace dimension");
    const int m = 2 * n;
    std::vector<WaveElement> hats;
    hats.reserve(m);
    for (int idx = 1; idx <= m; ++idx) hats.push_back(WaveElement::scaled_hat(m, idx));
    const GramMatrix gram = assemble_gram(hats);

    double dev = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            dev = std::max(dev, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));

    PackingChain chain;
    chain.gram_identity_dev = dev;
    chain.value = 0.5 * exact_width_orthonormal(2, n) / std::sqrt(static_cast<double>(m));
    const double reference = 0.25 / std::sqrt(static_cast<double>(n));
    chain.verified = dev <= 1e-12 && std::abs(chain.value - reference) <= 1e-14;
    return chain;
}

}  // namespace detail

/// 0.25 / sqrt(N), produced by the scaled-hat proof chain rather than as a
/// literal constant; throws if the chain fails to reproduce that value.
inline double packing_lower_bound(int n) {
    const PackingChain chain = detail::packing_chain(n);
    if (!chain.verified)
        throw std::logic_error("packing chain failed to reproduce the quarter-inverse-sqrt bound");
    return chain.value;
}

/// Non-throwing chain evaluation for table output.
inline PackingChain verify_packing_chain(int n) { return detail::packing_chain(n); }

/// Joint report for the snapshot/hat width chain at grid count 2N.
struct ChainReport {
    int n = 0;
    int m_grid = 0;
    WidthEstimate phi_estimate;  // snapshots at speeds m/(2N), 0 <= m <= 2N
    WidthEstimate psi_estimate;  // hats with grid 2N
    double hat_gram_identity_dev = 0.0;
    double packing_value = 0.0;
    bool chain_verified = false;
};

/// Estimates both sets numerically and checks that the estimates respect the
/// analytic chain: the snapshot-set upper bound dominates half the hat-set
/// dual bound as well as the packing value, and the hat family is orthonormal
/// after scaling.
inline ChainReport chain_check(int m_grid, int n, const MinimaxConfig& cfg = {}) {
    if (n < 1) throw std::invalid_argument("chain check needs a positive subspace dimension");
    if (m_grid != 2 * n)
        throw std::invalid_argument("chain check expects the speed grid count 2N");

    ChainReport rep;
    rep.n = n;
    rep.m_grid = m_grid;

    std::vector<WaveElement> snapshots;
    snapshots.reserve(m_grid + 1);
    for (int m = 0; m <= m_grid; ++m)
        snapshots.push_back(WaveElement::snapshot(static_cast<double>(m) / m_grid));
    rep.phi_estimate = minimax_width(assemble_gram(snapshots), n, cfg);

    std::vector<WaveElement> hats;
    hats.reserve(m_grid);
    for (int m = 1; m <= m_grid; ++m) hats.push_back(WaveElement::hat(m_grid, m));
    rep.psi_estimate = minimax_width(assemble_gram(hats), n, cfg);

    const PackingChain chain = detail::packing_chain(n);
    rep.hat_gram_identity_dev = chain.gram_identity_dev;
    rep.packing_value = chain.value;
    rep.phi_estimate.lower_packing = chain.value;

    rep.chain_verified = chain.verified &&
                         rep.phi_estimate.upper >= 0.5 * rep.psi_estimate.lower_dual - 1e-9 &&
                         rep.phi_estimate.upper >= chain.value - 1e-9 &&
                         rep.psi_estimate.lower_dual <= rep.psi_estimate.upper + 1e-9;
    return rep;
}

}  // namespace wavewidth
