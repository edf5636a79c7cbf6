#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/grid.hpp"
#include "sbvp/linalg.hpp"
#include "sbvp/sobolev.hpp"

namespace sbvp {

/// Integration entries are declared blown up once they exceed this magnitude.
inline constexpr double kBlowUpThreshold = 1e300;

/// The coefficients A(t;eps) and f(t;eps) of one problem instance, with eps
/// already bound. Carries symbolic t-derivative chains up to order n-1, so A
/// and f live in W^{n-1}_inf as the problem class requires.
class CoefficientProvider {
public:
    CoefficientProvider(int m, std::vector<ComplexExpr> A_entries,
                        std::optional<std::vector<ComplexExpr>> f_entries, double eps, int max_order)
        : m_(m), n_(max_order), eps_(eps) {
        if (m < 1) throw ShapeError("coefficient dimension must be positive");
        if (max_order < 1) throw ShapeError("coefficient jet order must be at least 1");
        if (static_cast<int>(A_entries.size()) != m * m)
            throw ShapeError("expected m*m coefficient entries for A");
        if (f_entries && static_cast<int>(f_entries->size()) != m)
            throw ShapeError("expected m forcing entries for f");
        A_chains_.reserve(A_entries.size());
        for (const auto& e : A_entries) A_chains_.push_back(derivative_chain(e, n_ - 1));
        if (f_entries) {
            f_chains_.emplace();
            f_chains_->reserve(f_entries->size());
            for (const auto& e : *f_entries) f_chains_->push_back(derivative_chain(e, n_ - 1));
        }
    }

    int dim() const noexcept { return m_; }
    int max_order() const noexcept { return n_; }
    double eps() const noexcept { return eps_; }
    bool has_forcing() const noexcept { return f_chains_.has_value(); }

    /// A(t), order-0 values (used at integrator stage points).
    CMatrix A_value(double t) const {
        CMatrix A(m_, m_);
        for (int r = 0; r < m_; ++r)
            for (int c = 0; c < m_; ++c)
                A(r, c) = A_chains_[static_cast<std::size_t>(r) * m_ + c][0].eval(t, eps_);
        return A;
    }

    CVector f_value(double t) const {
        if (!f_chains_) throw ShapeError("coefficient provider has no forcing term");
        CVector f(m_);
        for (int r = 0; r < m_; ++r) f(r) = (*f_chains_)[static_cast<std::size_t>(r)][0].eval(t, eps_);
        return f;
    }

    /// [A(t), A'(t), ..., A^{(n-1)}(t)].
    std::vector<CMatrix> A_jet(double t) const {
        std::vector<CMatrix> out(static_cast<std::size_t>(n_), CMatrix(m_, m_));
        for (int k = 0; k < n_; ++k)
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < m_; ++c)
                    out[static_cast<std::size_t>(k)](r, c) =
                        A_chains_[static_cast<std::size_t>(r) * m_ + c][static_cast<std::size_t>(k)]
                            .eval(t, eps_);
        return out;
    }

    std::vector<CVector> f_jet(double t) const {
        if (!f_chains_) throw ShapeError("coefficient provider has no forcing term");
        std::vector<CVector> out(static_cast<std::size_t>(n_), CVector(m_));
        for (int k = 0; k < n_; ++k)
            for (int r = 0; r < m_; ++r)
                out[static_cast<std::size_t>(k)](r) =
                    (*f_chains_)[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)].eval(t, eps_);
        return out;
    }

    /// A as a matrix jet of order n-1 on the grid.
    MatrixJet coefficient_matrix_jet(const Grid& grid) const {
        MatrixJet out(grid, m_, n_ - 1);
        for (int i = 0; i < grid.node_count(); ++i) {
            const auto Aj = A_jet(grid.node(i));
            for (int k = 0; k < n_; ++k)
                for (int r = 0; r < m_; ++r)
                    for (int c = 0; c < m_; ++c) out.at(r, c, k, i) = Aj[static_cast<std::size_t>(k)](r, c);
        }
        return out;
    }

    /// f as a jet of order n-1 on the grid; absent forcing is the zero function.
    JetFunction forcing_jet(const Grid& grid) const {
        JetFunction out(grid, m_, n_ - 1);
        if (!f_chains_) return out;
        for (int i = 0; i < grid.node_count(); ++i) {
            const auto fj = f_jet(grid.node(i));
            for (int k = 0; k < n_; ++k)
                for (int r = 0; r < m_; ++r) out.at(r, k, i) = fj[static_cast<std::size_t>(k)](r);
        }
        return out;
    }

private:
    static std::vector<ComplexExpr> derivative_chain(const ComplexExpr& e, int order) {
        std::vector<ComplexExpr> chain;
        chain.reserve(static_cast<std::size_t>(order) + 1);
        chain.push_back(e);
        for (int k = 0; k < order; ++k) chain.push_back(chain.back().derivative(Expr::Var::T));
        return chain;
    }

    int m_, n_;
    double eps_;
    std::vector<std::vector<ComplexExpr>> A_chains_; // row-major m*m, chains of length n
    std::optional<std::vector<std::vector<ComplexExpr>>> f_chains_;
};

namespace detail {

inline void check_blow_up(const CMatrix& Y) {
    if (Y.cwiseAbs().maxCoeff() > kBlowUpThreshold)
        throw BlowUpError("ODE integration blew up (entry exceeded 1e300); the system is stiff "
                          "or diverging on this interval");
}

/// Leibniz recursion shared by the public lift entry points. With
/// use_forcing = false the f terms are dropped (homogeneous equation).
inline JetFunction lift_layers(const CoefficientProvider& coeffs, const Grid& grid,
                               const std::vector<CVector>& layer0, int n, bool use_forcing) {
    if (n > coeffs.max_order())
        throw ShapeError("insufficient coefficient jet order for the requested lift");
    if (static_cast<int>(layer0.size()) != grid.node_count())
        throw ShapeError("lift_derivatives: one order-0 value per node required");
    const int m = coeffs.dim();
    const bool with_f = use_forcing && coeffs.has_forcing();
    JetFunction y(grid, m, n);
    for (int i = 0; i < grid.node_count(); ++i) {
        const double t = grid.node(i);
        const auto A = coeffs.A_jet(t);
        std::vector<CVector> f;
        if (with_f) f = coeffs.f_jet(t);
        std::vector<CVector> layers(static_cast<std::size_t>(n) + 1);
        layers[0] = layer0[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) {
            const auto& binom = binomial_row(k);
            CVector next = with_f ? f[static_cast<std::size_t>(k)] : CVector(CVector::Zero(m));
            for (int j = 0; j <= k; ++j)
                next -= binom[static_cast<std::size_t>(j)] *
                        (A[static_cast<std::size_t>(j)] * layers[static_cast<std::size_t>(k - j)]);
            layers[static_cast<std::size_t>(k + 1)] = next;
        }
        for (int k = 0; k <= n; ++k)
            for (int r = 0; r < m; ++r) y.at(r, k, i) = layers[static_cast<std::size_t>(k)](r);
    }
    if (!y.all_finite()) throw BlowUpError("derivative lift produced non-finite values");
    return y;
}

/// Classical fixed-step RK4 for M' = -A(t) M + F(t) over the grid nodes,
/// with stage values at half nodes.
template <typename ForcingFn>
std::vector<CMatrix> rk4_integrate(const CoefficientProvider& coeffs, const Grid& grid,
                                   const CMatrix& initial, ForcingFn&& forcing) {
    const double h = grid.step();
    std::vector<CMatrix> values;
    values.reserve(static_cast<std::size_t>(grid.node_count()));
    values.push_back(initial);
    auto rhs = [&](double t, const CMatrix& M) -> CMatrix {
        CMatrix out = -(coeffs.A_value(t) * M);
        forcing(t, out);
        return out;
    };
    CMatrix cur = initial;
    for (int i = 0; i < grid.subintervals(); ++i) {
        const double t = grid.node(i);
        const CMatrix k1 = rhs(t, cur);
        const CMatrix k2 = rhs(t + 0.5 * h, cur + (0.5 * h) * k1);
        const CMatrix k3 = rhs(t + 0.5 * h, cur + (0.5 * h) * k2);
        const CMatrix k4 = rhs(t + h, cur + h * k3);
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_blow_up(cur);
        values.push_back(cur);
    }
    return values;
}

} // namespace detail

/// Fills derivative layers 1..n of a grid solution from the equation itself:
/// y^(k+1) = f^(k) - sum_{j=0}^{k} C(k,j) A^(j) y^(k-j), applied nodewise.
/// Layers never come from numerical differentiation of layer 0, so
/// high-order Sobolev norms carry no O(N^-1) differencing noise.
inline JetFunction lift_derivatives(const CoefficientProvider& coeffs, const Grid& grid,
                                    const std::vector<CVector>& layer0, int n) {
    return detail::lift_layers(coeffs, grid, layer0, n, true);
}

/// Fundamental matrix Y of Y' = -A Y, normalized by Y(a) = I, as a full jet
/// of order n. Layer 0 comes from RK4 on the grid; layers 1..n from the
/// homogeneous Leibniz recursion applied per column.
inline MatrixJet fundamental_matrix(const CoefficientProvider& coeffs, const Grid& grid) {
    const int m = coeffs.dim();
    const int n = coeffs.max_order();
    const auto values = detail::rk4_integrate(coeffs, grid, CMatrix(CMatrix::Identity(m, m)),
                                              [](double, CMatrix&) {});
    MatrixJet Y(grid, m, n);
    for (int c = 0; c < m; ++c) {
        std::vector<CVector> layer0;
        layer0.reserve(values.size());
        for (const auto& V : values) layer0.push_back(V.col(c));
        const JetFunction col = detail::lift_layers(coeffs, grid, layer0, n, false);
        for (int r = 0; r < m; ++r)
            for (int k = 0; k <= n; ++k)
                for (int i = 0; i < grid.node_count(); ++i) Y.at(r, c, k, i) = col.at(r, k, i);
    }
    return Y;
}

/// Solution of the Cauchy problem x' + A x = f, x(a) = 0, as a full jet of
/// order n. Layer 0 by RK4, higher layers by the Leibniz recursion.
inline JetFunction cauchy_solve(const CoefficientProvider& coeffs, const Grid& grid) {
    if (!coeffs.has_forcing()) throw ShapeError("cauchy_solve requires a forcing term");
    const int m = coeffs.dim();
    const int n = coeffs.max_order();
    const auto values = detail::rk4_integrate(
        coeffs, grid, CMatrix(CMatrix::Zero(m, 1)),
        [&](double t, CMatrix& out) { out.col(0) += coeffs.f_value(t); });
    std::vector<CVector> layer0;
    layer0.reserve(values.size());
    for (const auto& V : values) layer0.push_back(V.col(0));
    return lift_derivatives(coeffs, grid, layer0, n);
}

/// Richardson indicator: re-solves on a grid with doubled resolution and
/// returns the max order-0 discrepancy at the shared nodes, over the
/// fundamental matrix and (when a forcing term is present) the Cauchy
/// solution.
inline double integration_error_estimate(const CoefficientProvider& coeffs, const Grid& grid) {
    const Grid fine = grid.refined();
    double worst = 0.0;
    {
        const MatrixJet coarse = fundamental_matrix(coeffs, grid);
        const MatrixJet refined = fundamental_matrix(coeffs, fine);
        for (int i = 0; i < grid.node_count(); ++i)
            for (int r = 0; r < coeffs.dim(); ++r)
                for (int c = 0; c < coeffs.dim(); ++c)
                    worst = std::max(worst,
                                     std::abs(coarse.at(r, c, 0, i) - refined.at(r, c, 0, 2 * i)));
    }
    if (coeffs.has_forcing()) {
        const JetFunction coarse = cauchy_solve(coeffs, grid);
        const JetFunction refined = cauchy_solve(coeffs, fine);
        for (int i = 0; i < grid.node_count(); ++i)
            for (int r = 0; r < coeffs.dim(); ++r)
                worst = std::max(worst, std::abs(coarse.at(r, 0, i) - refined.at(r, 0, 2 * i)));
    }
    return worst;
}

} // namespace sbvp
