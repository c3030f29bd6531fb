#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wavewidth {

/// Dense row-major matrix of doubles. Sized for desk-scale problems
/// (a few hundred rows); no views, no allocator tricks.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, value) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("matrix dimensions must be nonnegative");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::vector<double> col(int j) const {
        std::vector<double> c(rows_);
        for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_col(int j, const std::vector<double>& values) {
        for (int i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
    }

    static Matrix from_cols(int rows, const std::vector<std::vector<double>>& cols) {
        Matrix m(rows, static_cast<int>(cols.size()));
        for (int j = 0; j < m.cols(); ++j) m.set_col(j, cols[j]);
        return m;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != static_cast<int>(x.size())) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns: input = Q diag(eigenvalues) Q^T.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

namespace detail {

inline double offdiag_frobenius(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace detail

/// Full symmetric eigendecomposition by cyclic Jacobi rotations. Converged
/// once the off-diagonal Frobenius mass drops below 1e-12 times the Frobenius
/// norm of the input; throws if that does not happen within max_sweeps.
inline SpectralDecomposition symmetric_eig(const Matrix& input, int max_sweeps = 100) {
    const int n = input.rows();
    if (n != input.cols()) throw std::invalid_argument("eigendecomposition needs a square matrix");
    const double scale = input.max_abs();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-12 * std::max(1.0, scale))
                throw std::invalid_argument("eigendecomposition needs a symmetric matrix");

    Matrix a = input;
    // Exact symmetry keeps the sweep updates consistent.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = v;
        }
    Matrix v = Matrix::identity(n);
    // Sweep down to machine level; accept once the mass stalls below the
    // 1e-12 certification threshold.
    const double fro = a.frobenius_norm();
    const double target_machine = 1e-15 * fro;
    const double target_certified = 1e-12 * fro;

    double off = detail::offdiag_frobenius(a);
    bool converged = off <= target_machine;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e154) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = a(p, i) = aip - s * (aiq + tau * aip);
                    a(i, q) = a(q, i) = aiq + s * (aip - tau * aiq);
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip - s * (viq + tau * vip);
                    v(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
        const double prev = off;
        off = detail::offdiag_frobenius(a);
        converged = off <= target_machine || (off <= target_certified && off >= 0.5 * prev);
    }
    if (!converged && off > target_certified)
        throw std::runtime_error("Jacobi eigensolver did not converge within the sweep budget");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

    SpectralDecomposition dec;
    dec.eigenvalues.resize(n);
    dec.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        dec.eigenvalues[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) dec.eigenvectors(i, j) = v(i, order[j]);
    }
    return dec;
}

}  // namespace wavewidth
