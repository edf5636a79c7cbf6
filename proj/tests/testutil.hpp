#pragma once

// Shared test helpers: finite-difference oracles, random jet generators and
// an independent row-reduction rank oracle. Everything here must stay
// independent of the implementation paths it is used to check.

#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "sbvp/sobolev.hpp"

namespace testutil {

/// Central finite difference, the oracle for symbolic derivatives.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Random jet with independent uniform[-1,1] real/imaginary parts. The data
/// is free-form: norm and product identities must hold for arbitrary layer
/// values, not only for jets of actual functions.
inline sbvp::JetFunction random_jet(std::mt19937_64& rng, const sbvp::Grid& grid, int m, int n,
                                    bool complex_entries = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    sbvp::JetFunction y(grid, m, n);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k <= n; ++k)
            for (int i = 0; i < grid.node_count(); ++i)
                y.at(j, k, i) = sbvp::Complex(u(rng), complex_entries ? u(rng) : 0.0);
    return y;
}

/// Rank by Gaussian elimination with partial pivoting and a relative pivot
/// threshold. Kept deliberately separate from the SVD-based rank in the
/// library so kernel-dimension tests have an independent second route.
inline int rref_rank(std::vector<std::vector<std::complex<double>>> rows, double rel_tol = 1e-8) {
    const std::size_t nrows = rows.size();
    if (nrows == 0) return 0;
    const std::size_t ncols = rows[0].size();
    double scale = 0.0;
    for (const auto& row : rows)
        for (const auto& z : row) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) return 0;
    const double tol = rel_tol * scale;
    int rank = 0;
    std::size_t lead = 0;
    for (std::size_t col = 0; col < ncols && lead < nrows; ++col) {
        std::size_t pivot = lead;
        for (std::size_t r = lead + 1; r < nrows; ++r)
            if (std::abs(rows[r][col]) > std::abs(rows[pivot][col])) pivot = r;
        if (std::abs(rows[pivot][col]) <= tol) continue;
        std::swap(rows[lead], rows[pivot]);
        for (std::size_t r = 0; r < nrows; ++r) {
            if (r == lead) continue;
            const std::complex<double> factor = rows[r][col] / rows[lead][col];
            for (std::size_t c = col; c < ncols; ++c) rows[r][c] -= factor * rows[lead][c];
        }
        ++lead;
        ++rank;
    }
    return rank;
}

} // namespace testutil
