#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/grid.hpp"

namespace sbvp {

using Complex = std::complex<double>;

namespace detail {

/// Pascal-triangle row of binomial coefficients C(k, 0..k) as doubles.
inline const std::vector<double>& binomial_row(int k) {
    static thread_local std::vector<std::vector<double>> rows{{1.0}};
    while (static_cast<int>(rows.size()) <= k) {
        const auto& prev = rows.back();
        std::vector<double> row(prev.size() + 1, 1.0);
        for (std::size_t j = 1; j + 1 < row.size(); ++j) row[j] = prev[j - 1] + prev[j];
        rows.push_back(std::move(row));
    }
    return rows[static_cast<std::size_t>(k)];
}

} // namespace detail

/// Element of (W^n_inf)^m on a grid: per node, the derivative values of
/// orders 0..n for each of the m components. Entries are complex.
class JetFunction {
public:
    JetFunction(Grid grid, int m, int n)
        : grid_(grid), m_(m), n_(n),
          data_(static_cast<std::size_t>(m) * (n + 1) * grid.node_count(), Complex(0.0)) {
        if (m < 1) throw ShapeError("jet needs at least one component");
        if (n < 0) throw ShapeError("jet order must be non-negative");
    }

    const Grid& grid() const noexcept { return grid_; }
    int components() const noexcept { return m_; }
    int order() const noexcept { return n_; }

    /// Value of derivative order k of component j at node i.
    Complex& at(int j, int k, int i) { return data_[index(j, k, i)]; }
    const Complex& at(int j, int k, int i) const { return data_[index(j, k, i)]; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](Complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    bool same_shape(const JetFunction& other) const {
        return grid_ == other.grid_ && m_ == other.m_ && n_ == other.n_;
    }

    /// Copy of this jet truncated to derivative orders 0..order.
    JetFunction truncated(int order) const {
        if (order < 0 || order > n_) throw ShapeError("truncation order out of range");
        JetFunction out(grid_, m_, order);
        for (int j = 0; j < m_; ++j)
            for (int k = 0; k <= order; ++k)
                for (int i = 0; i < grid_.node_count(); ++i) out.at(j, k, i) = at(j, k, i);
        return out;
    }

    /// Jet of the derivative: layer k of the result is layer k+1 of this.
    JetFunction derivative_shifted() const {
        if (n_ < 1) throw ShapeError("cannot shift an order-0 jet");
        JetFunction out(grid_, m_, n_ - 1);
        for (int j = 0; j < m_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int i = 0; i < grid_.node_count(); ++i) out.at(j, k, i) = at(j, k + 1, i);
        return out;
    }

private:
    std::size_t index(int j, int k, int i) const {
        return (static_cast<std::size_t>(j) * (n_ + 1) + k) * grid_.node_count() + i;
    }

    Grid grid_;
    int m_, n_;
    std::vector<Complex> data_;
};

/// Matrix-valued jet on a grid; houses coefficient matrices A(.;eps) and
/// fundamental matrices Y(.;eps). Shape m x m x (n+1) x (N+1).
class MatrixJet {
public:
    MatrixJet(Grid grid, int m, int n)
        : grid_(grid), m_(m), n_(n),
          data_(static_cast<std::size_t>(m) * m * (n + 1) * grid.node_count(), Complex(0.0)) {
        if (m < 1) throw ShapeError("matrix jet needs positive dimension");
        if (n < 0) throw ShapeError("jet order must be non-negative");
    }

    const Grid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return m_; }
    int order() const noexcept { return n_; }

    Complex& at(int r, int c, int k, int i) { return data_[index(r, c, k, i)]; }
    const Complex& at(int r, int c, int k, int i) const { return data_[index(r, c, k, i)]; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](Complex z) {
            return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
    }

    JetFunction column(int c) const {
        JetFunction out(grid_, m_, n_);
        for (int r = 0; r < m_; ++r)
            for (int k = 0; k <= n_; ++k)
                for (int i = 0; i < grid_.node_count(); ++i) out.at(r, k, i) = at(r, c, k, i);
        return out;
    }

    /// Y * coef: linear combination of the columns, per derivative layer.
    JetFunction apply_to(const std::vector<Complex>& coef) const {
        if (static_cast<int>(coef.size()) != m_) throw ShapeError("coefficient vector dimension mismatch");
        JetFunction out(grid_, m_, n_);
        for (int r = 0; r < m_; ++r)
            for (int k = 0; k <= n_; ++k)
                for (int i = 0; i < grid_.node_count(); ++i) {
                    Complex acc(0.0);
                    for (int c = 0; c < m_; ++c) acc += at(r, c, k, i) * coef[c];
                    out.at(r, k, i) = acc;
                }
        return out;
    }

    MatrixJet truncated(int order) const {
        if (order < 0 || order > n_) throw ShapeError("truncation order out of range");
        MatrixJet out(grid_, m_, order);
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c)
                for (int k = 0; k <= order; ++k)
                    for (int i = 0; i < grid_.node_count(); ++i) out.at(r, c, k, i) = at(r, c, k, i);
        return out;
    }

private:
    std::size_t index(int r, int c, int k, int i) const {
        return ((static_cast<std::size_t>(r) * m_ + c) * (n_ + 1) + k) * grid_.node_count() + i;
    }

    Grid grid_;
    int m_, n_;
    std::vector<Complex> data_;
};

// -- norms -------------------------------------------------------------------

/// max over nodes and components of |y_j^(k)(t_i)|.
inline double sup_norm(const JetFunction& y, int k) {
    if (k < 0 || k > y.order()) throw ShapeError("derivative order out of range");
    double s = 0.0;
    for (int j = 0; j < y.components(); ++j)
        for (int i = 0; i < y.grid().node_count(); ++i) s = std::max(s, std::abs(y.at(j, k, i)));
    return s;
}

/// Sum-of-sups Sobolev norm: sum_{k=0}^{order} sup_norm(y, k). The essential
/// supremum is approximated by the grid maximum, accurate to O(N^-2) for C^2
/// data since the jets carry exact derivative values at nodes.
inline double sobolev_norm(const JetFunction& y, int order) {
    if (order < 0 || order > y.order()) throw ShapeError("norm order out of range");
    double s = 0.0;
    for (int k = 0; k <= order; ++k) s += sup_norm(y, k);
    return s;
}

/// Entrywise-max matrix sup per derivative order.
inline double sup_norm(const MatrixJet& A, int k) {
    if (k < 0 || k > A.order()) throw ShapeError("derivative order out of range");
    double s = 0.0;
    for (int r = 0; r < A.dim(); ++r)
        for (int c = 0; c < A.dim(); ++c)
            for (int i = 0; i < A.grid().node_count(); ++i)
                s = std::max(s, std::abs(A.at(r, c, k, i)));
    return s;
}

inline double matrix_sobolev_norm(const MatrixJet& A, int order) {
    if (order < 0 || order > A.order()) throw ShapeError("norm order out of range");
    double s = 0.0;
    for (int k = 0; k <= order; ++k) s += sup_norm(A, k);
    return s;
}

// -- arithmetic ----------------------------------------------------------------

/// alpha*x + y, entrywise over all layers.
inline JetFunction jet_axpy(Complex alpha, const JetFunction& x, const JetFunction& y) {
    if (!x.same_shape(y)) throw ShapeError("jet_axpy: shape mismatch");
    JetFunction out(y.grid(), y.components(), y.order());
    for (int j = 0; j < y.components(); ++j)
        for (int k = 0; k <= y.order(); ++k)
            for (int i = 0; i < y.grid().node_count(); ++i)
                out.at(j, k, i) = alpha * x.at(j, k, i) + y.at(j, k, i);
    return out;
}

inline MatrixJet matrix_axpy(Complex alpha, const MatrixJet& x, const MatrixJet& y) {
    if (!(x.grid() == y.grid()) || x.dim() != y.dim() || x.order() != y.order())
        throw ShapeError("matrix_axpy: shape mismatch");
    MatrixJet out(y.grid(), y.dim(), y.order());
    for (int r = 0; r < y.dim(); ++r)
        for (int c = 0; c < y.dim(); ++c)
            for (int k = 0; k <= y.order(); ++k)
                for (int i = 0; i < y.grid().node_count(); ++i)
                    out.at(r, c, k, i) = alpha * x.at(r, c, k, i) + y.at(r, c, k, i);
    return out;
}

/// Product jet (A y) via the Leibniz rule, nodewise:
/// (Ay)^(k) = sum_{j=0}^{k} C(k,j) A^(j) y^(k-j).
inline JetFunction jet_multiply(const MatrixJet& A, const JetFunction& y) {
    if (!(A.grid() == y.grid()) || A.dim() != y.components() || A.order() != y.order())
        throw ShapeError("jet_multiply: shape mismatch");
    const int m = y.components();
    const int n = y.order();
    JetFunction out(y.grid(), m, n);
    for (int k = 0; k <= n; ++k) {
        const auto& binom = detail::binomial_row(k);
        for (int i = 0; i < y.grid().node_count(); ++i)
            for (int r = 0; r < m; ++r) {
                Complex acc(0.0);
                for (int j = 0; j <= k; ++j)
                    for (int c = 0; c < m; ++c)
                        acc += binom[static_cast<std::size_t>(j)] * A.at(r, c, j, i) * y.at(c, k - j, i);
                out.at(r, k, i) = acc;
            }
    }
    return out;
}

/// Scalar-jet product (m = 1 on both sides), same Leibniz rule.
inline JetFunction jet_multiply(const JetFunction& u, const JetFunction& v) {
    if (u.components() != 1 || v.components() != 1)
        throw ShapeError("scalar jet_multiply requires single-component jets");
    if (!u.same_shape(v)) throw ShapeError("jet_multiply: shape mismatch");
    const int n = u.order();
    JetFunction out(u.grid(), 1, n);
    for (int k = 0; k <= n; ++k) {
        const auto& binom = detail::binomial_row(k);
        for (int i = 0; i < u.grid().node_count(); ++i) {
            Complex acc(0.0);
            for (int j = 0; j <= k; ++j)
                acc += binom[static_cast<std::size_t>(j)] * u.at(0, j, i) * v.at(0, k - j, i);
            out.at(0, k, i) = acc;
        }
    }
    return out;
}

// -- builders -------------------------------------------------------------------

/// Jet of a vector of expressions evaluated on the grid, with exact symbolic
/// t-derivatives up to `order`, at the given eps.
inline JetFunction make_jet(const Grid& grid, const std::vector<ComplexExpr>& entries, int order,
                            double eps) {
    const int m = static_cast<int>(entries.size());
    JetFunction out(grid, m, order);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < grid.node_count(); ++i) {
            const auto jet = entries[static_cast<std::size_t>(j)].jet(grid.node(i), eps, order);
            for (int k = 0; k <= order; ++k) out.at(j, k, i) = jet[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

/// Matrix jet of row-major m*m expression entries on the grid.
inline MatrixJet make_matrix_jet(const Grid& grid, const std::vector<ComplexExpr>& entries, int m,
                                 int order, double eps) {
    if (static_cast<int>(entries.size()) != m * m)
        throw ShapeError("make_matrix_jet: expected m*m entries");
    MatrixJet out(grid, m, order);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            for (int i = 0; i < grid.node_count(); ++i) {
                const auto jet =
                    entries[static_cast<std::size_t>(r) * m + c].jet(grid.node(i), eps, order);
                for (int k = 0; k <= order; ++k) out.at(r, c, k, i) = jet[static_cast<std::size_t>(k)];
            }
    return out;
}

} // namespace sbvp
