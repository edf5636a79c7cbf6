#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "sbvp/boundary.hpp"
#include "sbvp/errors.hpp"
#include "sbvp/grid.hpp"
#include "sbvp/linalg.hpp"
#include "sbvp/ode.hpp"
#include "sbvp/sobolev.hpp"

namespace sbvp {

/// One boundary-value problem y' + A y = f, B y = c at a fixed parameter
/// value.
struct Problem {
    Grid grid;
    int m = 1;
    int n = 1;
    CoefficientProvider coeffs;
    BoundaryOperator B;
    CVector c;

    Problem(Grid g, int m_, int n_, CoefficientProvider coeffs_, BoundaryOperator B_, CVector c_)
        : grid(g), m(m_), n(n_), coeffs(std::move(coeffs_)), B(std::move(B_)), c(std::move(c_)) {
        if (coeffs.dim() != m || B.dim() != m || c.size() != m)
            throw ShapeError("problem parts disagree on dimension m");
        if (coeffs.max_order() != n || B.order() != n)
            throw ShapeError("problem parts disagree on order n");
    }
};

/// Solution bundle: y = v + w with v the homogeneous part carrying the
/// boundary data (B v = c) and w the zero-boundary part (B w = 0); x is the
/// Cauchy solution with x(a) = 0 and c_tilde = [B Y]^{-1} c, so v = Y c_tilde.
struct SolveResult {
    JetFunction y;
    JetFunction v;
    JetFunction w;
    JetFunction x;
    CVector c_tilde;
    CMatrix char_matrix;
    NonsingularityReport char_report;
    double ode_residual = 0.0;      // W^{n-1}_inf norm of y' + A y - f
    double boundary_residual = 0.0; // |B y - c|
};

/// (Sobolev residual of y' + A y - f at order n-1, Euclidean |B y - c|).
/// y' is read from jet layer 1 and A y is formed with jet_multiply.
inline std::pair<double, double> residual_norms(const Problem& p, const JetFunction& y) {
    if (y.components() != p.m || y.order() < p.n) throw ShapeError("residual_norms: shape mismatch");
    const MatrixJet A = p.coeffs.coefficient_matrix_jet(p.grid);
    const JetFunction f = p.coeffs.forcing_jet(p.grid);
    JetFunction r = y.derivative_shifted().truncated(p.n - 1);
    r = jet_axpy(Complex(1.0), jet_multiply(A, y.truncated(p.n - 1)), r);
    r = jet_axpy(Complex(-1.0), f, r);
    const double ode_res = sobolev_norm(r, p.n - 1);
    const CVector bres = p.B.apply(y) - p.c;
    return {ode_res, bres.norm()};
}

/// Solves the boundary-value problem through the fundamental matrix:
/// Y' = -A Y, x the Cauchy solution, then y = x + Y [B Y]^{-1} (c - B x).
/// Refuses when the characteristic matrix is singular; that parameter regime
/// has no unique solution and a least-squares answer would mask it.
inline SolveResult solve(const Problem& p) {
    const MatrixJet Y = fundamental_matrix(p.coeffs, p.grid);
    const CMatrix M = characteristic_matrix(p.B, Y);
    const NonsingularityReport report = nonsingularity_report(M);
    if (report.singular)
        throw SingularMatrixError("characteristic matrix [B Y] is singular (sigma_min/sigma_max = " +
                                  std::to_string(report.sigma_max > 0.0
                                                     ? report.sigma_min / report.sigma_max
                                                     : 0.0) +
                                  "); the problem has no unique solution");

    JetFunction x = p.coeffs.has_forcing()
                        ? cauchy_solve(p.coeffs, p.grid)
                        : JetFunction(p.grid, p.m, p.n); // zero forcing -> zero Cauchy solution

    const CVector bx = p.B.apply(x);
    std::vector<Complex> coef_y(static_cast<std::size_t>(p.m));
    {
        const CVector cy = lu_solve(M, p.c - bx);
        for (int j = 0; j < p.m; ++j) coef_y[static_cast<std::size_t>(j)] = cy(j);
    }
    JetFunction y = jet_axpy(Complex(1.0), Y.apply_to(coef_y), x);

    const CVector c_tilde = lu_solve(M, p.c);
    std::vector<Complex> coef_v(static_cast<std::size_t>(p.m));
    for (int j = 0; j < p.m; ++j) coef_v[static_cast<std::size_t>(j)] = c_tilde(j);
    JetFunction v = Y.apply_to(coef_v);
    JetFunction w = jet_axpy(Complex(-1.0), v, y);

    const auto [ode_res, bnd_res] = residual_norms(p, y);
    return SolveResult{std::move(y),     std::move(v), std::move(w), std::move(x), c_tilde, M,
                       report,           ode_res,      bnd_res};
}

/// Dimension of the homogeneous problem's solution space: m minus the
/// numerical rank of [B Y]. The operator (L, B) is Fredholm with index zero,
/// so this also equals the codimension of the range.
inline int homogeneous_kernel_dim(const Problem& p) {
    const MatrixJet Y = fundamental_matrix(p.coeffs, p.grid);
    const CMatrix M = characteristic_matrix(p.B, Y);
    return p.m - numerical_rank(M);
}

} // namespace sbvp
