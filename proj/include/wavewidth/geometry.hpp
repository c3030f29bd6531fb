#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavewidth/linalg.hpp"
#include "wavewidth/parallel.hpp"

namespace wavewidth {

/// Pairwise inner products of a snapshot set. Every norm, projection and
/// width below is computed through this matrix, i.e. in the coordinates of
/// the snapshot span.
struct GramMatrix {
    Matrix entries;
    std::vector<std::string> labels;

    explicit GramMatrix(Matrix m, std::vector<std::string> labs = {})
        : entries(std::move(m)), labels(std::move(labs)) {
        if (entries.rows() != entries.cols())
            throw std::invalid_argument("Gram matrix must be square");
        if (!labels.empty() && static_cast<int>(labels.size()) != entries.rows())
            throw std::invalid_argument("label count must match Gram size");
        const double scale = std::max(1.0, entries.max_abs());
        for (int i = 0; i < entries.rows(); ++i)
            for (int j = i + 1; j < entries.cols(); ++j)
                if (std::abs(entries(i, j) - entries(j, i)) > 1e-14 * scale)
                    throw std::invalid_argument("Gram matrix must be symmetric");
    }

    static GramMatrix identity(int n) { return GramMatrix(Matrix::identity(n)); }

    int size() const { return entries.rows(); }
    double operator()(int i, int j) const { return entries(i, j); }
    double trace() const { return entries.trace(); }
};

template <class E>
concept SnapshotLike = requires(const E& a, const E& b) {
    { inner_product(a, b) } -> std::convertible_to<double>;
    { label(a) } -> std::convertible_to<std::string>;
};

/// Gram matrix of a snapshot set; entry (i,j) is the pairing of elements i
/// and j. Rows are independent, so assembly is data-parallel.
template <SnapshotLike E>
GramMatrix assemble_gram(std::span<const E> elements, unsigned threads = 1) {
    if (elements.empty())
        throw std::invalid_argument("cannot assemble a Gram matrix from an empty set");
    const int n = static_cast<int>(elements.size());
    Matrix g(n, n);
    parallel_for(n, threads, [&](int i) {
        for (int j = i; j < n; ++j) {
            const double v = inner_product(elements[i], elements[j]);
            g(i, j) = v;
            g(j, i) = v;
        }
    });
    std::vector<std::string> labels;
    labels.reserve(elements.size());
    for (const auto& e : elements) labels.push_back(label(e));
    return GramMatrix(std::move(g), std::move(labels));
}

template <SnapshotLike E>
GramMatrix assemble_gram(const std::vector<E>& elements, unsigned threads = 1) {
    return assemble_gram(std::span<const E>(elements), threads);
}

/// a^T G b in snapshot coordinates.
inline double g_dot(const GramMatrix& g, std::span<const double> a, std::span<const double> b) {
    const int n = g.size();
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("coordinate vector size must match Gram size");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += g(i, j) * b[j];
        acc += a[i] * row;
    }
    return acc;
}

namespace detail {

/// Squared G-norm with a positive-semidefiniteness guard: values below
/// -1e-10 * trace(G) * |v|^2 indicate an indefinite matrix; small negative
/// round-off is clamped to zero.
inline double g_norm_squared(const GramMatrix& g, std::span<const double> v) {
    const double q = g_dot(g, v, v);
    double euclid = 0.0;
    for (double vi : v) euclid += vi * vi;
    if (q < -1e-10 * std::max(g.trace(), 1.0) * euclid)
        throw std::runtime_error("matrix is not positive semidefinite within tolerance");
    return std::max(q, 0.0);
}

}  // namespace detail

/// Modified Gram-Schmidt in the G-inner product with one re-orthogonalization
/// pass. Columns whose G-norm after projection falls below drop_tol times
/// their initial G-norm are dropped, so the result can have fewer columns.
inline Matrix g_orthonormalize(const Matrix& columns, const GramMatrix& g,
                               double drop_tol = 1e-10) {
    if (columns.rows() != g.size())
        throw std::invalid_argument("column length must match Gram size");
    std::vector<std::vector<double>> basis;
    for (int j = 0; j < columns.cols(); ++j) {
        std::vector<double> v = columns.col(j);
        const double initial_norm = std::sqrt(detail::g_norm_squared(g, v));
        if (initial_norm == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                const double c = g_dot(g, b, v);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
            }
        }
        const double norm = std::sqrt(detail::g_norm_squared(g, v));
        if (norm < drop_tol * initial_norm) continue;
        for (auto& vi : v) vi /= norm;
        basis.push_back(std::move(v));
    }
    return Matrix::from_cols(g.size(), basis);
}

/// Candidate subspace of the snapshot span: coefficient columns, orthonormal
/// with respect to the Gram inner product they were built against. The ops
/// that consume a subspace re-check that orthonormality, which also catches a
/// mismatched Gram.
struct Subspace {
    Matrix coeffs;  // S x N

    int dim() const { return coeffs.cols(); }
    int ambient_size() const { return coeffs.rows(); }
};

/// max |B^T G B - I|.
inline double orthonormality_defect(const GramMatrix& g, const Subspace& sub) {
    if (sub.ambient_size() != g.size())
        throw std::invalid_argument("subspace ambient size must match Gram size");
    const Matrix gb = g.entries * sub.coeffs;
    const Matrix btgb = sub.coeffs.transposed() * gb;
    double defect = 0.0;
    for (int i = 0; i < btgb.rows(); ++i)
        for (int j = 0; j < btgb.cols(); ++j)
            defect = std::max(defect, std::abs(btgb(i, j) - (i == j ? 1.0 : 0.0)));
    return defect;
}

inline void require_orthonormal(const GramMatrix& g, const Subspace& sub, double tol = 1e-8) {
    if (orthonormality_defect(g, sub) > tol)
        throw std::invalid_argument("subspace is not orthonormal against this Gram matrix");
}

/// Orthonormalizes candidate columns against g and wraps them.
inline Subspace make_subspace(const GramMatrix& g, const Matrix& candidates) {
    return Subspace{g_orthonormalize(candidates, g)};
}

namespace detail {

/// Residual of snapshot k against an orthonormal subspace, no contract check:
/// sqrt(G_kk - sum_j (B^T G e_k)_j^2), tiny negative round-off clamped.
inline double residual_unchecked(const GramMatrix& g, const Subspace& sub, int k) {
    double r2 = g(k, k);
    for (int j = 0; j < sub.dim(); ++j) {
        double c = 0.0;
        for (int i = 0; i < g.size(); ++i) c += sub.coeffs(i, j) * g(i, k);
        r2 -= c * c;
    }
    return std::sqrt(std::max(r2, 0.0));
}

}  // namespace detail

// The residual operations validate the orthonormality contract at a loose
// threshold: genuinely wrong inputs (a mismatched Gram, unnormalized columns)
// miss by orders of magnitude, while correctly constructed rank-edge
// eigendirections of a nearly singular Gram carry irreducible round-off in
// the defect estimate itself.
inline constexpr double kResidualContractTol = 1e-3;

/// Distance of snapshot k to the subspace in the G-norm. For an identity
/// Gram this reduces to sqrt(1 - sum_j (d_j)_k^2) for orthonormal columns d_j.
inline double projection_residual(const GramMatrix& g, const Subspace& sub, int k) {
    if (k < 0 || k >= g.size()) throw std::invalid_argument("snapshot index out of range");
    require_orthonormal(g, sub, kResidualContractTol);
    return detail::residual_unchecked(g, sub, k);
}

/// Residuals of every snapshot against the subspace.
inline std::vector<double> projection_residuals(const GramMatrix& g, const Subspace& sub) {
    require_orthonormal(g, sub, kResidualContractTol);
    std::vector<double> r(g.size());
    for (int k = 0; k < g.size(); ++k) r[k] = detail::residual_unchecked(g, sub, k);
    return r;
}

struct SupResidual {
    double value = 0.0;
    int index = 0;  // smallest index attaining the maximum
};

/// Worst-case residual over the snapshot set; ties resolve to the smallest
/// index for determinism.
inline SupResidual sup_residual(const GramMatrix& g, const Subspace& sub) {
    const std::vector<double> r = projection_residuals(g, sub);
    SupResidual best{r[0], 0};
    for (int k = 1; k < static_cast<int>(r.size()); ++k)
        if (r[k] > best.value) best = {r[k], k};
    return best;
}

inline SpectralDecomposition symmetric_eig(const GramMatrix& g, int max_sweeps = 100) {
    return symmetric_eig(g.entries, max_sweeps);
}

namespace detail {

/// Maps eigenvector columns of the weighted Gram back to G-orthonormal
/// coordinate columns: column j is sqrt(D) y_j / sqrt(lambda_j). The mapped
/// basis is kept as-is; re-mixing it through Gram-Schmidt in snapshot
/// coordinates would inject coordinate-level round-off that ruins residual
/// accuracy on nearly singular Grams. Eigenvalues at solver-noise level
/// (1e-13 of the top one) are excluded; at most n columns are produced.
inline Subspace subspace_from_weighted_eig(const GramMatrix& g,
                                           const std::vector<double>& sqrt_weights,
                                           const SpectralDecomposition& eig, int n) {
    const int s = g.size();
    const double noise_cut =
        1e-13 * std::max(eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0], 0.0);
    std::vector<std::vector<double>> cols;
    for (int j = 0; j < s && static_cast<int>(cols.size()) < n; ++j) {
        const double lambda = eig.eigenvalues[j];
        if (!(lambda > noise_cut) || lambda <= 0.0) break;
        std::vector<double> c(s);
        const double inv = 1.0 / std::sqrt(lambda);
        for (int i = 0; i < s; ++i) c[i] = sqrt_weights[i] * eig.eigenvectors(i, j) * inv;
        cols.push_back(std::move(c));
    }
    return Subspace{Matrix::from_cols(s, cols)};
}

}  // namespace detail

/// Subspace spanned by the top-n eigendirections of the weighted Gram;
/// minimizes the weighted sum of squared residuals over all n-dimensional
/// subspaces. The effective dimension is capped at the weighted rank.
inline Subspace weighted_pod_subspace(const GramMatrix& g, std::span<const double> weights,
                                      int n) {
    const int s = g.size();
    if (static_cast<int>(weights.size()) != s)
        throw std::invalid_argument("weight count must match Gram size");
    if (n < 0) throw std::invalid_argument("subspace dimension must be nonnegative");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("weights must not all vanish");
    std::vector<double> sq(s);
    Matrix weighted(s, s);
    for (int i = 0; i < s; ++i) sq[i] = std::sqrt(weights[i] / total);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) weighted(i, j) = sq[i] * sq[j] * g(i, j);
    const SpectralDecomposition eig = symmetric_eig(weighted);
    return detail::subspace_from_weighted_eig(g, sq, eig, n);
}

/// Uniformly weighted variant; throws when n exceeds the numerical rank
/// (eigenvalues below 1e-10 relative count as zero).
inline Subspace pod_subspace(const GramMatrix& g, int n) {
    if (n < 0) throw std::invalid_argument("subspace dimension must be nonnegative");
    const SpectralDecomposition eig = symmetric_eig(g);
    const double top = eig.eigenvalues.empty() ? 0.0 : std::max(eig.eigenvalues[0], 0.0);
    int rank = 0;
    for (double lambda : eig.eigenvalues)
        if (lambda > 1e-10 * top) ++rank;
    if (n > rank)
        throw std::invalid_argument("requested dimension exceeds the numerical rank of the Gram");
    const std::vector<double> unit(g.size(), 1.0);
    return detail::subspace_from_weighted_eig(g, unit, eig, n);
}

}  // namespace wavewidth
