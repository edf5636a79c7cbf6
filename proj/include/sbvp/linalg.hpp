#pragma once

#include <complex>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sbvp/errors.hpp"

namespace sbvp {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Relative singular-value threshold separating rank deficiency from roundoff.
inline constexpr double kSingularRelTol = 1e-10;

/// Numerical rank via SVD with a relative threshold on singular values.
inline int numerical_rank(const CMatrix& M, double rel_tol = kSingularRelTol) {
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

/// Exact 1-norm condition number (matrices here are small, m <= 64).
inline double condition_1norm(const CMatrix& M) {
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= kSingularRelTol * sv(0))
        return std::numeric_limits<double>::infinity();
    const CMatrix inv = M.inverse();
    auto norm1 = [](const CMatrix& X) {
        double best = 0.0;
        for (Eigen::Index c = 0; c < X.cols(); ++c) best = std::max(best, X.col(c).cwiseAbs().sum());
        return best;
    };
    return norm1(M) * norm1(inv);
}

/// Dense LU solve with partial pivoting. The caller is responsible for
/// checking nonsingularity first.
inline CVector lu_solve(const CMatrix& M, const CVector& rhs) {
    if (M.rows() != M.cols() || M.rows() != rhs.size())
        throw ShapeError("lu_solve: dimension mismatch");
    return M.partialPivLu().solve(rhs);
}

} // namespace sbvp
