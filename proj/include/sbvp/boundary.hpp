#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/linalg.hpp"
#include "sbvp/sobolev.hpp"

namespace sbvp {

/// A point term must sit within this fraction of the interval length from a
/// grid node; applying an operator with a farther-off node is an error.
inline constexpr double kNodeMatchRelTol = 1e-9;

/// alpha * y^(order)(node).
struct PointTerm {
    double node = 0.0;
    int order = 0;
    CMatrix alpha; // m x m
};

/// scale * integral_a^b kernel(t) y^(order)(t) dt, kernel entries are
/// expressions in t (eps already bound).
struct IntegralTerm {
    std::vector<ComplexExpr> kernel; // row-major m*m
    int order = 0;
    double eps = 0.0;
    Complex scale{1.0, 0.0};
};

/// Concrete subfamily of the continuous functionals (W^n_inf)^m -> C^m: a
/// finite sum of point-evaluation and integral terms. Covers initial,
/// two-point, multipoint and integral boundary conditions. Orders are capped
/// at n-1 because point evaluation of y^(n) is not well defined for W^n_inf
/// elements.
class BoundaryOperator {
public:
    BoundaryOperator(int m, int n, std::vector<PointTerm> points, std::vector<IntegralTerm> integrals)
        : m_(m), n_(n), points_(std::move(points)), integrals_(std::move(integrals)) {
        if (m_ < 1) throw ShapeError("boundary operator needs positive dimension");
        if (n_ < 1) throw ShapeError("boundary operator needs order n >= 1");
        if (points_.empty() && integrals_.empty())
            throw ShapeError("boundary operator needs at least one term");
        for (const auto& p : points_) {
            if (p.order < 0 || p.order > n_ - 1)
                throw ShapeError("point term derivative order must lie in [0, n-1]");
            if (p.alpha.rows() != m_ || p.alpha.cols() != m_)
                throw ShapeError("point term coefficient matrix must be m x m");
        }
        for (const auto& g : integrals_) {
            if (g.order < 0 || g.order > n_ - 1)
                throw ShapeError("integral term derivative order must lie in [0, n-1]");
            if (static_cast<int>(g.kernel.size()) != m_ * m_)
                throw ShapeError("integral kernel must have m*m entries");
        }
    }

    int dim() const noexcept { return m_; }
    int order() const noexcept { return n_; }
    const std::vector<PointTerm>& point_terms() const noexcept { return points_; }
    const std::vector<IntegralTerm>& integral_terms() const noexcept { return integrals_; }

    int max_term_order() const noexcept {
        int k = 0;
        for (const auto& p : points_) k = std::max(k, p.order);
        for (const auto& g : integrals_) k = std::max(k, g.order);
        return k;
    }

    /// B y: point terms read nodes directly, integral terms use composite
    /// Simpson on the grid (requires even N).
    CVector apply(const JetFunction& y) const {
        if (y.components() != m_) throw ShapeError("boundary apply: component count mismatch");
        if (y.order() < max_term_order())
            throw ShapeError("boundary apply: jet order below highest term order");
        const Grid& grid = y.grid();
        CVector out = CVector::Zero(m_);
        for (const auto& p : points_) {
            if (p.node < grid.a() - kNodeMatchRelTol * (grid.b() - grid.a()) ||
                p.node > grid.b() + kNodeMatchRelTol * (grid.b() - grid.a()))
                throw ShapeError("boundary point term lies outside [a, b]");
            const int i = grid.nearest_node(p.node);
            if (std::abs(p.node - grid.node(i)) > kNodeMatchRelTol * (grid.b() - grid.a()))
                throw ShapeError("boundary point term does not coincide with a grid node");
            CVector yk(m_);
            for (int r = 0; r < m_; ++r) yk(r) = y.at(r, p.order, i);
            out += p.alpha * yk;
        }
        if (!integrals_.empty() && grid.subintervals() % 2 != 0)
            throw ShapeError("integral boundary terms require an even number of subintervals");
        for (const auto& g : integrals_) {
            // composite Simpson over [a, b]
            CVector acc = CVector::Zero(m_);
            for (int i = 0; i < grid.node_count(); ++i) {
                const double w = (i == 0 || i == grid.subintervals()) ? 1.0
                                 : (i % 2 == 1)                       ? 4.0
                                                                      : 2.0;
                const double t = grid.node(i);
                CVector yk(m_);
                for (int r = 0; r < m_; ++r) yk(r) = y.at(r, g.order, i);
                CMatrix K(m_, m_);
                for (int r = 0; r < m_; ++r)
                    for (int c = 0; c < m_; ++c)
                        K(r, c) = g.kernel[static_cast<std::size_t>(r) * m_ + c].eval(t, g.eps);
                acc += w * (K * yk);
            }
            out += g.scale * (grid.step() / 3.0) * acc;
        }
        return out;
    }

private:
    int m_, n_;
    std::vector<PointTerm> points_;
    std::vector<IntegralTerm> integrals_;
};

/// [B Y]: column j is B applied to column j of the fundamental matrix. This
/// is the square matrix whose nonsingularity decides unique solvability.
inline CMatrix characteristic_matrix(const BoundaryOperator& B, const MatrixJet& Y) {
    if (B.dim() != Y.dim()) throw ShapeError("characteristic_matrix: dimension mismatch");
    const int m = B.dim();
    CMatrix M(m, m);
    for (int c = 0; c < m; ++c) M.col(c) = B.apply(Y.column(c));
    return M;
}

struct NonsingularityReport {
    Complex det;
    double cond = 0.0; // 1-norm condition number, inf when singular
    bool singular = false;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Determinant, 1-norm condition number and a singularity flag. Singular
/// means the smallest singular value is below 1e-10 times the largest; this
/// is the numerical rendering of condition (0).
inline NonsingularityReport nonsingularity_report(const CMatrix& M) {
    NonsingularityReport rep;
    rep.det = M.partialPivLu().determinant();
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    rep.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    rep.sigma_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    rep.singular = rep.sigma_min < kSingularRelTol * rep.sigma_max || rep.sigma_max == 0.0;
    rep.cond = condition_1norm(M);
    return rep;
}

} // namespace sbvp
