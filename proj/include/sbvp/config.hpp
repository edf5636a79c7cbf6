#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbvp/errors.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/parametric.hpp"

namespace sbvp {

/// Snap distances beyond this fraction of the interval length are reported
/// as warnings when boundary nodes are moved onto the grid.
inline constexpr double kSnapWarnRelTol = 1e-12;

inline constexpr int kMaxProblemDim = 64;

struct ConfigOverrides {
    std::optional<int> grid_N;
    std::optional<std::vector<double>> schedule;
    std::optional<double> r_max;
};

struct LoadedConfig {
    Family family;
    double r_max = 10.0;
    std::string csv_path;  // from output.csv, may be empty
    int precision = 12;    // significant digits in CSV output
    std::vector<std::string> warnings;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("config: missing key '" + std::string(key) + "' in " + where);
    return *it;
}

inline double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("config: " + where + " must be a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError("config: " + where + " must be an integer");
    return j.get<int>();
}

inline Expr parse_expr_field(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError("config: " + where + " must be an expression string");
    try {
        return Expr::parse(j.get<std::string>());
    } catch (const ParseError& e) {
        throw ConfigError("config: " + where + ": " + e.what());
    }
}

/// m*m expression matrix, with an optional parallel imaginary-part matrix.
inline std::vector<ComplexExpr> parse_expr_matrix(const json& re, const json* im, int m,
                                                  const std::string& where) {
    if (!re.is_array() || static_cast<int>(re.size()) != m)
        throw ConfigError("config: " + where + " must be an array of " + std::to_string(m) + " rows");
    if (im && (!im->is_array() || static_cast<int>(im->size()) != m))
        throw ConfigError("config: " + where + "_im must match the shape of " + where);
    std::vector<ComplexExpr> out;
    out.reserve(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r) {
        const json& row = re[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != m)
            throw ConfigError("config: " + where + " row " + std::to_string(r) + " must have " +
                              std::to_string(m) + " entries");
        for (int c = 0; c < m; ++c) {
            const std::string at = where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
            ComplexExpr e(parse_expr_field(row[static_cast<std::size_t>(c)], at));
            if (im)
                e.im = parse_expr_field((*im)[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)],
                                        at + " (imaginary part)");
            out.push_back(std::move(e));
        }
    }
    return out;
}

inline std::vector<ComplexExpr> parse_expr_vector(const json& re, const json* im, int m,
                                                  const std::string& where) {
    if (!re.is_array() || static_cast<int>(re.size()) != m)
        throw ConfigError("config: " + where + " must be an array of " + std::to_string(m) +
                          " expression strings");
    if (im && (!im->is_array() || static_cast<int>(im->size()) != m))
        throw ConfigError("config: " + where + "_im must match the shape of " + where);
    std::vector<ComplexExpr> out;
    out.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const std::string at = where + "[" + std::to_string(j) + "]";
        ComplexExpr e(parse_expr_field(re[static_cast<std::size_t>(j)], at));
        if (im) e.im = parse_expr_field((*im)[static_cast<std::size_t>(j)], at + " (imaginary part)");
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace detail

/// Loads and validates a problem/family description. Boundary point nodes
/// are snapped to the nearest grid node; snaps beyond 1e-12*(b-a) produce a
/// warning. Throws ConfigError on any schema or expression problem.
inline LoadedConfig load_config(const std::string& path, const ConfigOverrides& overrides = {}) {
    using detail::json;
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
    }

    LoadedConfig out;
    Family& fam = out.family;

    const json& interval = detail::require(root, "interval", "top level");
    fam.a = detail::as_number(detail::require(interval, "a", "interval"), "interval.a");
    fam.b = detail::as_number(detail::require(interval, "b", "interval"), "interval.b");
    if (!(fam.a < fam.b)) throw ConfigError("config: interval requires a < b");

    const json& dims = detail::require(root, "dims", "top level");
    fam.m = detail::as_int(detail::require(dims, "m", "dims"), "dims.m");
    fam.n = detail::as_int(detail::require(dims, "n", "dims"), "dims.n");
    if (fam.m < 1 || fam.m > kMaxProblemDim)
        throw ConfigError("config: dims.m must lie in [1, " + std::to_string(kMaxProblemDim) + "]");
    if (fam.n < 1) throw ConfigError("config: dims.n must be at least 1");

    const json& grid = detail::require(root, "grid", "top level");
    fam.N = detail::as_int(detail::require(grid, "N", "grid"), "grid.N");
    if (overrides.grid_N) fam.N = *overrides.grid_N;
    if (fam.N < 2) throw ConfigError("config: grid.N must be at least 2");
    if (fam.N % 2 != 0) throw ConfigError("config: grid.N must be even (composite Simpson rule)");

    const json* A_im = root.contains("A_im") ? &root["A_im"] : nullptr;
    fam.A_entries = detail::parse_expr_matrix(detail::require(root, "A", "top level"), A_im, fam.m, "A");
    const json* f_im = root.contains("f_im") ? &root["f_im"] : nullptr;
    fam.f_entries = detail::parse_expr_vector(detail::require(root, "f", "top level"), f_im, fam.m, "f");
    const json* c_im = root.contains("c_im") ? &root["c_im"] : nullptr;
    fam.c_entries = detail::parse_expr_vector(detail::require(root, "c", "top level"), c_im, fam.m, "c");
    for (int j = 0; j < fam.m; ++j)
        if (fam.c_entries[static_cast<std::size_t>(j)].uses(Expr::Var::T))
            throw ConfigError("config: c[" + std::to_string(j) + "] may depend on eps only");

    const Grid g(fam.a, fam.b, fam.N);
    const json& boundary = detail::require(root, "boundary", "top level");
    if (!boundary.is_array() || boundary.empty())
        throw ConfigError("config: boundary must be a nonempty array of term records");
    for (std::size_t ti = 0; ti < boundary.size(); ++ti) {
        const json& rec = boundary[ti];
        const std::string where = "boundary[" + std::to_string(ti) + "]";
        const json& kind = detail::require(rec, "kind", where);
        BoundaryTermSpec term;
        term.order = detail::as_int(detail::require(rec, "order", where), where + ".order");
        if (term.order < 0 || term.order > fam.n - 1)
            throw ConfigError("config: " + where + ".order must lie in [0, n-1]");
        if (kind == "point") {
            term.kind = BoundaryTermSpec::Kind::Point;
            term.node = detail::as_number(detail::require(rec, "node", where), where + ".node");
            if (term.node < fam.a || term.node > fam.b)
                throw ConfigError("config: " + where + ".node must lie in [a, b]");
            const double snapped = g.node(g.nearest_node(term.node));
            if (std::abs(snapped - term.node) > kSnapWarnRelTol * (fam.b - fam.a))
                out.warnings.push_back(where + ": node " + std::to_string(term.node) +
                                       " snapped to grid node " + std::to_string(snapped));
            term.node = std::min(std::max(snapped, fam.a), fam.b);
            const json* coeff_im = rec.contains("coeff_im") ? &rec["coeff_im"] : nullptr;
            term.coeff = detail::parse_expr_matrix(detail::require(rec, "coeff", where), coeff_im,
                                                   fam.m, where + ".coeff");
            for (const auto& e : term.coeff)
                if (e.uses(Expr::Var::T))
                    throw ConfigError("config: " + where +
                                      ".coeff may depend on eps only (point term)");
        } else if (kind == "integral") {
            term.kind = BoundaryTermSpec::Kind::Integral;
            const json* kernel_im = rec.contains("kernel_im") ? &rec["kernel_im"] : nullptr;
            term.coeff = detail::parse_expr_matrix(detail::require(rec, "kernel", where), kernel_im,
                                                   fam.m, where + ".kernel");
        } else {
            throw ConfigError("config: " + where + ".kind must be 'point' or 'integral'");
        }
        const bool eps_factor = rec.value("eps_factor", false);
        (eps_factor ? fam.B1 : fam.B0).terms.push_back(std::move(term));
    }

    fam.eps0 = 1.0;
    out.r_max = 10.0;
    if (root.contains("sweep")) {
        const json& sweep = root["sweep"];
        if (sweep.contains("eps0")) fam.eps0 = detail::as_number(sweep["eps0"], "sweep.eps0");
        if (sweep.contains("r_max")) out.r_max = detail::as_number(sweep["r_max"], "sweep.r_max");
        if (sweep.contains("schedule")) {
            const json& sched = sweep["schedule"];
            if (!sched.is_array() || sched.empty())
                throw ConfigError("config: sweep.schedule must be a nonempty array");
            fam.schedule.clear();
            for (std::size_t i = 0; i < sched.size(); ++i)
                fam.schedule.push_back(detail::as_number(sched[i], "sweep.schedule entry"));
        } else {
            const int k_min = sweep.contains("k_min") ? detail::as_int(sweep["k_min"], "sweep.k_min") : 3;
            const int k_max = sweep.contains("k_max") ? detail::as_int(sweep["k_max"], "sweep.k_max") : 12;
            if (k_min > k_max) throw ConfigError("config: sweep.k_min must not exceed sweep.k_max");
            fam.schedule = geometric_schedule(k_min, k_max);
        }
    }
    if (overrides.schedule) fam.schedule = *overrides.schedule;
    if (overrides.r_max) out.r_max = *overrides.r_max;
    if (fam.schedule.empty()) throw ConfigError("config: schedule must be nonempty");
    for (std::size_t i = 0; i < fam.schedule.size(); ++i) {
        const double e = fam.schedule[i];
        if (!(e > 0.0) || !(e < fam.eps0))
            throw ConfigError("config: schedule values must lie in (0, eps0)");
        if (i > 0 && !(e < fam.schedule[i - 1]))
            throw ConfigError("config: schedule must be strictly decreasing");
    }

    if (root.contains("output")) {
        const json& output = root["output"];
        if (output.contains("csv")) {
            if (!output["csv"].is_string()) throw ConfigError("config: output.csv must be a string");
            out.csv_path = output["csv"].get<std::string>();
        }
        if (output.contains("precision")) {
            out.precision = detail::as_int(output["precision"], "output.precision");
            if (out.precision < 6 || out.precision > 17)
                throw ConfigError("config: output.precision must lie in [6, 17]");
        }
    }

    try {
        fam.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return out;
}

} // namespace sbvp
