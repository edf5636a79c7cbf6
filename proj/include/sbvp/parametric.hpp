#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sbvp/boundary.hpp"
#include "sbvp/bvp.hpp"
#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/ode.hpp"
#include "sbvp/sobolev.hpp"

namespace sbvp {

// -- small statistics helpers -------------------------------------------------

struct LogLogFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares fit of log(y) against log(x); points with non-positive x or
/// y are skipped. Needs at least two usable points.
inline LogLogFit loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    LogLogFit fit;
    const std::size_t n = lx.size();
    if (n < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    const double dn = static_cast<double>(n);
    const double vxx = sxx - sx * sx / dn;
    const double vxy = sxy - sx * sy / dn;
    const double vyy = syy - sy * sy / dn;
    if (vxx == 0.0) return fit;
    fit.slope = vxy / vxx;
    fit.intercept = (sy - fit.slope * sx) / dn;
    fit.r2 = vyy == 0.0 ? 1.0 : (vxy * vxy) / (vxx * vyy);
    return fit;
}

// -- family -------------------------------------------------------------------

/// One term of a boundary operator at the expression level: the coefficient
/// matrix (point terms, eps only) or kernel (integral terms, t and eps) is
/// still symbolic in eps.
struct BoundaryTermSpec {
    enum class Kind { Point, Integral };
    Kind kind = Kind::Point;
    double node = 0.0; // point terms only
    int order = 0;
    std::vector<ComplexExpr> coeff; // row-major m*m
};

struct BoundaryOperatorSpec {
    std::vector<BoundaryTermSpec> terms;
};

/// eps = 2^-k for k = k_min..k_max, decreasing.
inline std::vector<double> geometric_schedule(int k_min = 3, int k_max = 12) {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

/// An eps-parametrized boundary-value problem family: A, f, B, c as
/// functions of eps on a fixed grid, together with the sweep schedule.
/// The boundary operator path is affine, B(eps) = B0 + eps*B1, with eps
/// additionally allowed inside the coefficient expressions.
struct Family {
    double a = 0.0, b = 1.0;
    int m = 1, n = 1, N = 100;
    std::vector<ComplexExpr> A_entries;                // m*m in (t, eps)
    std::optional<std::vector<ComplexExpr>> f_entries; // m in (t, eps)
    BoundaryOperatorSpec B0, B1;
    std::vector<ComplexExpr> c_entries; // m in eps
    double eps0 = 1.0;
    std::vector<double> schedule = geometric_schedule();

    Grid grid() const { return Grid(a, b, N); }

    void validate() const {
        if (!(a < b)) throw ShapeError("family requires a < b");
        if (m < 1) throw ShapeError("family requires m >= 1");
        if (n < 1) throw ShapeError("family requires n >= 1");
        if (static_cast<int>(A_entries.size()) != m * m)
            throw ShapeError("family: A must have m*m entries");
        if (f_entries && static_cast<int>(f_entries->size()) != m)
            throw ShapeError("family: f must have m entries");
        if (static_cast<int>(c_entries.size()) != m)
            throw ShapeError("family: c must have m entries");
        for (const auto& e : c_entries)
            if (e.uses(Expr::Var::T)) throw ShapeError("family: c entries may depend on eps only");
        if (B0.terms.empty() && B1.terms.empty())
            throw ShapeError("family: boundary operator needs at least one term");
        auto check_terms = [&](const BoundaryOperatorSpec& spec) {
            for (const auto& term : spec.terms) {
                if (static_cast<int>(term.coeff.size()) != m * m)
                    throw ShapeError("family: boundary term coefficients must be m*m");
                if (term.order < 0 || term.order > n - 1)
                    throw ShapeError("family: boundary term order must lie in [0, n-1]");
                if (term.kind == BoundaryTermSpec::Kind::Point) {
                    if (term.node < a || term.node > b)
                        throw ShapeError("family: boundary node outside [a, b]");
                    for (const auto& e : term.coeff)
                        if (e.uses(Expr::Var::T))
                            throw ShapeError("family: point coefficients may depend on eps only");
                }
            }
        };
        check_terms(B0);
        check_terms(B1);
        if (schedule.empty()) throw ShapeError("family: schedule must be nonempty");
        double prev = eps0;
        for (double e : schedule) {
            if (!(e > 0.0) || !(e < eps0)) throw ShapeError("family: schedule must lie in (0, eps0)");
            if (!(e < prev) && prev != eps0)
                throw ShapeError("family: schedule must be strictly decreasing");
            if (!(e <= prev)) throw ShapeError("family: schedule must be strictly decreasing");
            prev = e;
        }
    }
};

namespace detail {

inline BoundaryOperator instantiate_boundary(const Family& fam, double eps) {
    std::vector<PointTerm> points;
    std::vector<IntegralTerm> integrals;
    auto add_terms = [&](const BoundaryOperatorSpec& spec, Complex scale) {
        for (const auto& term : spec.terms) {
            if (term.kind == BoundaryTermSpec::Kind::Point) {
                CMatrix alpha(fam.m, fam.m);
                for (int r = 0; r < fam.m; ++r)
                    for (int c = 0; c < fam.m; ++c)
                        alpha(r, c) =
                            term.coeff[static_cast<std::size_t>(r) * fam.m + c].eval(0.0, eps);
                points.push_back(PointTerm{term.node, term.order, scale * alpha});
            } else {
                integrals.push_back(IntegralTerm{term.coeff, term.order, eps, scale});
            }
        }
    };
    add_terms(fam.B0, Complex(1.0));
    add_terms(fam.B1, Complex(eps));
    return BoundaryOperator(fam.m, fam.n, std::move(points), std::move(integrals));
}

inline CVector instantiate_rhs(const Family& fam, double eps) {
    CVector c(fam.m);
    for (int j = 0; j < fam.m; ++j) c(j) = fam.c_entries[static_cast<std::size_t>(j)].eval(0.0, eps);
    return c;
}

/// Problem with the family's operator path at `eps` but externally supplied
/// right-hand sides (used for strong-convergence probes on fixed data).
inline Problem instantiate_with_data(const Family& fam, double eps,
                                     std::optional<std::vector<ComplexExpr>> f_entries, CVector c) {
    CoefficientProvider coeffs(fam.m, fam.A_entries, std::move(f_entries), eps, fam.n);
    return Problem(fam.grid(), fam.m, fam.n, std::move(coeffs), instantiate_boundary(fam, eps),
                   std::move(c));
}

/// Jet of t^k e_j with exact derivative layers; k may exceed the expression
/// grammar's exponent cap, so the layers are computed directly.
inline JetFunction monomial_jet(const Grid& grid, int m, int order, int k, int j) {
    JetFunction y(grid, m, order);
    for (int i = 0; i < grid.node_count(); ++i) {
        const double t = grid.node(i);
        double factor = 1.0; // k! / (k-l)!
        for (int l = 0; l <= std::min(order, k); ++l) {
            y.at(j, l, i) = factor * std::pow(t, k - l);
            factor *= static_cast<double>(k - l);
        }
    }
    return y;
}

/// Default probe set for strong-convergence checks: monomials t^k e_j for
/// k = 0..n+2, j = 1..m. Necessarily partial — strong operator convergence
/// cannot be verified on all of (W^n_inf)^m.
inline std::vector<JetFunction> default_probes(const Family& fam) {
    std::vector<JetFunction> probes;
    const Grid grid = fam.grid();
    for (int k = 0; k <= fam.n + 2; ++k)
        for (int j = 0; j < fam.m; ++j) probes.push_back(monomial_jet(grid, fam.m, fam.n, k, j));
    return probes;
}

} // namespace detail

/// Binds eps in every part of the family and assembles the Problem.
inline Problem instantiate(const Family& fam, double eps) {
    fam.validate();
    if (eps < 0.0 || eps >= fam.eps0) throw ShapeError("instantiate: eps must lie in [0, eps0)");
    CoefficientProvider coeffs(fam.m, fam.A_entries, fam.f_entries, eps, fam.n);
    return Problem(fam.grid(), fam.m, fam.n, std::move(coeffs),
                   detail::instantiate_boundary(fam, eps), detail::instantiate_rhs(fam, eps));
}

// -- condition checks -----------------------------------------------------------

/// Halvings appended below the schedule before a convergence check gives up.
inline constexpr int kConditionExtensionMax = 40;
/// Consecutive sub-tolerance deviations required to declare convergence
/// (guards against an oscillating deviation dipping through the tolerance).
inline constexpr int kConsecutiveBelowTol = 2;

struct ConditionReport {
    std::string name;
    bool pass = false;
    std::string reason;
    double tol = 0.0;
    std::vector<std::pair<double, double>> table; // (eps, deviation), decreasing eps
    double slope = std::numeric_limits<double>::quiet_NaN();
    NonsingularityReport limit_report{}; // condition (0) only
};

namespace detail {

/// Shared decay detector for conditions (I) and (II): evaluates the
/// deviation over the schedule, then keeps halving eps until the deviation
/// stays below tol for kConsecutiveBelowTol consecutive points. Convergence
/// to zero cannot be decided from finitely many samples; this is the
/// documented operational rendering.
template <typename DeviationFn>
ConditionReport decay_check(const Family& fam, double tol, std::string name, DeviationFn&& deviation) {
    ConditionReport rep;
    rep.name = std::move(name);
    rep.tol = tol;
    int below = 0;
    bool converged = false;
    try {
        for (double eps : fam.schedule) {
            const double d = deviation(eps);
            rep.table.emplace_back(eps, d);
            below = d <= tol ? below + 1 : 0;
            if (below >= kConsecutiveBelowTol) {
                converged = true;
                break;
            }
        }
        double eps = fam.schedule.back();
        for (int k = 0; k < kConditionExtensionMax && !converged; ++k) {
            eps *= 0.5;
            const double d = deviation(eps);
            rep.table.emplace_back(eps, d);
            below = d <= tol ? below + 1 : 0;
            if (below >= kConsecutiveBelowTol) converged = true;
        }
    } catch (const Error& e) {
        rep.pass = false;
        rep.reason = std::string("deviation not computable: ") + e.what();
        return rep;
    }
    std::vector<double> xs, ys;
    for (const auto& [e, d] : rep.table) {
        xs.push_back(e);
        ys.push_back(d);
    }
    rep.slope = loglog_fit(xs, ys).slope;
    rep.pass = converged;
    rep.reason = converged ? "deviation decays below tolerance"
                           : "deviation does not decay below tolerance";
    return rep;
}

} // namespace detail

/// Condition (0): the limit (eps = 0) homogeneous problem has only the
/// trivial solution, i.e. the limit characteristic matrix is nonsingular.
/// ODE failures propagate.
inline ConditionReport check_condition_zero(const Family& fam) {
    fam.validate();
    ConditionReport rep;
    rep.name = "(0)";
    CoefficientProvider coeffs(fam.m, fam.A_entries, std::nullopt, 0.0, fam.n);
    const MatrixJet Y = fundamental_matrix(coeffs, fam.grid());
    const CMatrix M = characteristic_matrix(detail::instantiate_boundary(fam, 0.0), Y);
    rep.limit_report = nonsingularity_report(M);
    rep.pass = !rep.limit_report.singular;
    rep.reason = rep.pass ? "limit characteristic matrix is nonsingular"
                          : "limit characteristic matrix is singular";
    return rep;
}

/// Condition (I): || A(eps) - A(0) ||_{n-1,inf} -> 0 along the schedule.
inline ConditionReport check_condition_I(const Family& fam) {
    fam.validate();
    const Grid grid = fam.grid();
    try {
        const CoefficientProvider limit(fam.m, fam.A_entries, std::nullopt, 0.0, fam.n);
        const MatrixJet A0 = limit.coefficient_matrix_jet(grid);
        const double tol = 1e-6 * (1.0 + matrix_sobolev_norm(A0, fam.n - 1));
        return detail::decay_check(fam, tol, "(I)", [&](double eps) {
            const CoefficientProvider at(fam.m, fam.A_entries, std::nullopt, eps, fam.n);
            const MatrixJet diff = matrix_axpy(Complex(-1.0), A0, at.coefficient_matrix_jet(grid));
            return matrix_sobolev_norm(diff, fam.n - 1);
        });
    } catch (const Error& e) {
        ConditionReport rep;
        rep.name = "(I)";
        rep.pass = false;
        rep.reason = std::string("limit coefficient matrix undefined: ") + e.what();
        return rep;
    }
}

/// Condition (II): B(eps) y -> B(0) y for every y, verified on the probe
/// set (sound but necessarily incomplete).
inline ConditionReport check_condition_II(const Family& fam, std::vector<JetFunction> probes = {}) {
    fam.validate();
    if (probes.empty()) probes = detail::default_probes(fam);
    try {
        const BoundaryOperator B0 = detail::instantiate_boundary(fam, 0.0);
        std::vector<CVector> base;
        base.reserve(probes.size());
        for (const auto& y : probes) base.push_back(B0.apply(y));
        double c_scale = detail::instantiate_rhs(fam, 0.0).cwiseAbs().maxCoeff();
        for (double eps : fam.schedule)
            c_scale = std::max(c_scale, detail::instantiate_rhs(fam, eps).cwiseAbs().maxCoeff());
        const double tol = 1e-8 * (1.0 + c_scale);
        return detail::decay_check(fam, tol, "(II)", [&](double eps) {
            const BoundaryOperator Be = detail::instantiate_boundary(fam, eps);
            double worst = 0.0;
            for (std::size_t p = 0; p < probes.size(); ++p)
                worst = std::max(worst, (Be.apply(probes[p]) - base[p]).norm());
            return worst;
        });
    } catch (const Error& e) {
        ConditionReport rep;
        rep.name = "(II)";
        rep.pass = false;
        rep.reason = std::string("limit boundary operator undefined: ") + e.what();
        return rep;
    }
}

// -- discrepancy and sweep ------------------------------------------------------

/// d~_{n-1,inf}(eps) = ||L(eps) y(.;0) - f(.;eps)||_{n-1,inf}
///                   + ||B(eps) y(.;0) - c(eps)||: the residual of the limit
/// solution inserted into the eps-problem.
inline double discrepancy(const Family& fam, double eps, const SolveResult& limit_solution) {
    const Problem p = instantiate(fam, eps);
    const auto [ode_part, boundary_part] = residual_norms(p, limit_solution.y);
    return ode_part + boundary_part;
}

struct SweepRow {
    double eps = 0.0;
    double error = 0.0;       // || y(.;0) - y(.;eps) ||_{n,inf}
    double discrepancy = 0.0; // d~_{n-1,inf}(eps)
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool eligible = false; // above the residual floor, counted in ratio stats
};

struct SweepReport {
    std::vector<SweepRow> rows; // ordered by decreasing eps
    double ratio_min = std::numeric_limits<double>::quiet_NaN();
    double ratio_max = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
    double residual_floor = 0.0;
    double r_max = 10.0;
    bool bracket_pass = false;
    bool degenerate = false; // no rows above the floor (e.g. family constant in eps)
    ConditionReport cond_zero, cond_I, cond_II;
    bool pass = false;

    /// Empirical bracket for the Theorem-2 constants: gamma_2 >= 1/ratio_min
    /// would bound error <= gamma_2 * discrepancy, and gamma_1 <= 1/ratio_max.
    double bracket_width() const { return ratio_max / ratio_min; }
};

struct SweepOptions {
    double r_max = 10.0;
    int threads = 0; // 0 = one per schedule point, capped by hardware
};

/// Runs the full error/discrepancy sweep over the schedule and renders the
/// Theorem-2 verdict: over rows where both error and discrepancy clear the
/// residual floor, ratio_max/ratio_min must not exceed r_max. Schedule
/// points are independent and evaluated concurrently; assembly is ordered by
/// eps, so the report does not depend on completion order.
inline SweepReport sweep(const Family& fam, const SweepOptions& opt = {}) {
    fam.validate();
    SweepReport report;
    report.r_max = opt.r_max;
    report.cond_zero = check_condition_zero(fam);
    if (!report.cond_zero.pass)
        throw SingularMatrixError("sweep requires condition (0): the limit problem is singular");
    report.cond_I = check_condition_I(fam);
    report.cond_II = check_condition_II(fam);

    const Problem limit_problem = instantiate(fam, 0.0);
    const SolveResult limit = solve(limit_problem);
    const double richardson = integration_error_estimate(limit_problem.coeffs, limit_problem.grid);

    const std::size_t rows = fam.schedule.size();
    report.rows.resize(rows);
    std::vector<double> self_residuals(rows, 0.0);
    std::vector<std::exception_ptr> failures(rows);

    auto run_row = [&](std::size_t idx) {
        const double eps = fam.schedule[idx];
        SweepRow row;
        row.eps = eps;
        const Problem p = instantiate(fam, eps);
        try {
            const SolveResult at = solve(p);
            row.error = sobolev_norm(jet_axpy(Complex(-1.0), at.y, limit.y), fam.n);
            const auto [ode_part, boundary_part] = residual_norms(p, limit.y);
            row.discrepancy = ode_part + boundary_part;
            row.ratio = row.discrepancy > 0.0 ? row.error / row.discrepancy
                                              : std::numeric_limits<double>::quiet_NaN();
            self_residuals[idx] = at.ode_residual + at.boundary_residual;
        } catch (const SingularMatrixError&) {
            throw SingularMatrixError("characteristic matrix is singular at eps = " +
                                      std::to_string(eps));
        }
        report.rows[idx] = row;
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t workers = std::min<std::size_t>(rows, hw);
    if (opt.threads > 0) workers = std::min<std::size_t>(workers, static_cast<std::size_t>(opt.threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < rows; ++i) run_row(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t idx = next.fetch_add(1);
                    if (idx >= rows) return;
                    try {
                        run_row(idx);
                    } catch (...) {
                        failures[idx] = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        for (const auto& f : failures)
            if (f) std::rethrow_exception(f);
    }

    double floor_base = limit.ode_residual + limit.boundary_residual;
    for (double r : self_residuals) floor_base = std::max(floor_base, r);
    floor_base = std::max(floor_base, richardson);
    report.residual_floor = 1e3 * floor_base;

    std::vector<double> xs, ys;
    for (auto& row : report.rows) {
        row.eligible = row.error > report.residual_floor && row.discrepancy > report.residual_floor;
        if (row.eligible) {
            report.ratio_min = std::isnan(report.ratio_min) ? row.ratio
                                                            : std::min(report.ratio_min, row.ratio);
            report.ratio_max = std::isnan(report.ratio_max) ? row.ratio
                                                            : std::max(report.ratio_max, row.ratio);
            xs.push_back(row.eps);
            ys.push_back(row.error);
        }
    }
    report.slope = loglog_fit(xs, ys).slope;
    report.degenerate = xs.empty();
    report.bracket_pass =
        report.degenerate || report.ratio_max <= opt.r_max * report.ratio_min;
    report.pass = report.cond_zero.pass && report.cond_I.pass && report.cond_II.pass &&
                  report.bracket_pass;
    return report;
}

// -- strong-convergence equivalence ----------------------------------------------

struct OperatorConvergenceRow {
    double eps = 0.0;
    double forward = 0.0; // max_y ||(L,B)(eps) y - (L,B)(0) y||
    double inverse = 0.0; // max_(f,c) ||solve(eps) - solve(0)||_{n,inf}
};

struct OperatorConvergenceReport {
    std::vector<OperatorConvergenceRow> rows;
    bool forward_pass = false;
    bool inverse_pass = false;
    bool pass = false;
    std::string reason;
};

/// Numerical face of the equivalence "(L,B)(eps) -> (L,B)(0) strongly iff
/// the inverses converge strongly": the forward column tests the operators
/// on the probe set, the inverse column re-solves with fixed right-hand
/// sides. Both must decay along the schedule.
inline OperatorConvergenceReport operator_convergence_check(const Family& fam,
                                                            std::vector<JetFunction> probes = {}) {
    fam.validate();
    if (probes.empty()) probes = detail::default_probes(fam);
    OperatorConvergenceReport report;

    const Grid grid = fam.grid();
    const CoefficientProvider limit_coeffs(fam.m, fam.A_entries, std::nullopt, 0.0, fam.n);
    const MatrixJet A0 = limit_coeffs.coefficient_matrix_jet(grid);
    const BoundaryOperator B0 = detail::instantiate_boundary(fam, 0.0);

    // fixed data probes: the family's own limit data plus unit boundary vectors
    std::vector<ComplexExpr> f0;
    if (fam.f_entries)
        for (const auto& e : *fam.f_entries) f0.push_back(e.bind_eps(0.0));
    else
        f0.assign(static_cast<std::size_t>(fam.m), ComplexExpr(Expr::constant(0.0)));
    std::vector<std::pair<std::vector<ComplexExpr>, CVector>> data_probes;
    data_probes.emplace_back(f0, detail::instantiate_rhs(fam, 0.0));
    for (int j = 0; j < fam.m; ++j) {
        CVector ej = CVector::Zero(fam.m);
        ej(j) = Complex(1.0);
        data_probes.emplace_back(std::vector<ComplexExpr>(static_cast<std::size_t>(fam.m),
                                                          ComplexExpr(Expr::constant(0.0))),
                                 ej);
    }

    std::vector<SolveResult> limit_solutions;
    double inverse_scale = 0.0;
    for (const auto& [f, c] : data_probes) {
        limit_solutions.push_back(solve(detail::instantiate_with_data(fam, 0.0, f, c)));
        inverse_scale = std::max(inverse_scale, sobolev_norm(limit_solutions.back().y, fam.n));
    }
    const double forward_floor = 1e-8 * (1.0 + matrix_sobolev_norm(A0, fam.n - 1));
    const double inverse_floor = 1e-8 * (1.0 + inverse_scale);

    std::vector<CVector> base;
    base.reserve(probes.size());
    for (const auto& y : probes) base.push_back(B0.apply(y));

    try {
        for (double eps : fam.schedule) {
            OperatorConvergenceRow row;
            row.eps = eps;
            const CoefficientProvider at(fam.m, fam.A_entries, std::nullopt, eps, fam.n);
            const MatrixJet dA = matrix_axpy(Complex(-1.0), A0, at.coefficient_matrix_jet(grid));
            const BoundaryOperator Be = detail::instantiate_boundary(fam, eps);
            for (std::size_t p = 0; p < probes.size(); ++p) {
                const double lpart =
                    sobolev_norm(jet_multiply(dA, probes[p].truncated(fam.n - 1)), fam.n - 1);
                const double bpart = (Be.apply(probes[p]) - base[p]).norm();
                row.forward = std::max(row.forward, lpart + bpart);
            }
            for (std::size_t d = 0; d < data_probes.size(); ++d) {
                const SolveResult at_eps =
                    solve(detail::instantiate_with_data(fam, eps, data_probes[d].first,
                                                        data_probes[d].second));
                row.inverse = std::max(
                    row.inverse,
                    sobolev_norm(jet_axpy(Complex(-1.0), at_eps.y, limit_solutions[d].y), fam.n));
            }
            report.rows.push_back(row);
        }
    } catch (const Error& e) {
        report.pass = false;
        report.reason = std::string("column not computable: ") + e.what();
        return report;
    }

    auto decays = [&](auto proj, double floor) {
        const double first = proj(report.rows.front());
        const double last = proj(report.rows.back());
        return last <= std::max(1e-2 * first, floor);
    };
    report.forward_pass = decays([](const OperatorConvergenceRow& r) { return r.forward; },
                                 forward_floor);
    report.inverse_pass = decays([](const OperatorConvergenceRow& r) { return r.inverse; },
                                 inverse_floor);
    report.pass = report.forward_pass && report.inverse_pass;
    report.reason = report.pass
                        ? "operators and inverses both converge strongly on the probe sets"
                        : "strong convergence fails on the probe sets";
    return report;
}

} // namespace sbvp
