// Command-line front end: solve | sweep | check | kernel over JSON problem
// configs. Exit codes: 0 success, 2 singular characteristic matrix,
// 3 config/parse error, 4 ODE blow-up, 5 condition or two-sided-estimate
// verdict failed.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbvp/sbvp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitSingular = 2;
constexpr int kExitConfig = 3;
constexpr int kExitBlowUp = 4;
constexpr int kExitVerdict = 5;

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::string fmt(sbvp::Complex z, int precision) {
    std::string s = fmt(z.real(), precision);
    if (z.imag() != 0.0) s += (z.imag() < 0 ? " - " : " + ") + fmt(std::abs(z.imag()), precision) + "i";
    return s;
}

int sweep_threads_from_env() {
    const char* env = std::getenv("SOBOLEV_BVP_THREADS");
    if (!env) return 0;
    try {
        const int v = std::stoi(env);
        return v > 0 ? v : 1;
    } catch (...) {
        return 0;
    }
}

std::optional<std::vector<double>> parse_schedule_flag(const std::string& flag) {
    if (flag.empty()) return std::nullopt;
    std::vector<double> out;
    std::stringstream ss(flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw sbvp::ConfigError("invalid --schedule entry '" + item + "'");
        }
    }
    if (out.empty()) throw sbvp::ConfigError("--schedule must list at least one value");
    return out;
}

std::string default_output_path(const std::string& config_path, const char* suffix) {
    return std::filesystem::path(config_path).stem().string() + suffix;
}

void print_warnings(const sbvp::LoadedConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // '\n' endings regardless of platform
    if (!out) throw sbvp::ConfigError("cannot open output file '" + path + "'");
    return out;
}

const char* pf(bool pass) { return pass ? "PASS" : "FAIL"; }

void print_condition(const sbvp::ConditionReport& rep, int precision) {
    std::cout << "condition " << rep.name << ": " << pf(rep.pass) << " -- " << rep.reason << "\n";
    if (rep.name == "(0)") {
        std::cout << "  det = " << fmt(rep.limit_report.det, precision)
                  << ", cond = " << fmt(rep.limit_report.cond, precision)
                  << ", sigma_min/sigma_max = "
                  << fmt(rep.limit_report.sigma_max > 0.0
                             ? rep.limit_report.sigma_min / rep.limit_report.sigma_max
                             : 0.0,
                         precision)
                  << "\n";
        return;
    }
    std::cout << "  tolerance = " << fmt(rep.tol, precision);
    if (!std::isnan(rep.slope)) std::cout << ", log-log slope = " << fmt(rep.slope, precision);
    std::cout << "\n";
    for (const auto& [eps, dev] : rep.table)
        std::cout << "    eps = " << fmt(eps, precision) << "  deviation = " << fmt(dev, precision)
                  << "\n";
}

struct CommonArgs {
    std::string config_path;
    int grid_N = 0;
    std::string schedule;
    double r_max = 0.0;
    std::string out_path;
    double eps = 0.0;
};

sbvp::LoadedConfig load(const CommonArgs& args, bool with_rmax_flag) {
    sbvp::ConfigOverrides ov;
    if (args.grid_N > 0) ov.grid_N = args.grid_N;
    ov.schedule = parse_schedule_flag(args.schedule);
    if (with_rmax_flag && args.r_max > 0.0) ov.r_max = args.r_max;
    auto cfg = sbvp::load_config(args.config_path, ov);
    print_warnings(cfg);
    return cfg;
}

int cmd_solve(const CommonArgs& args) {
    const auto cfg = load(args, false);
    const sbvp::Problem p = sbvp::instantiate(cfg.family, args.eps);
    const sbvp::SolveResult res = sbvp::solve(p);
    const int prec = cfg.precision;

    std::cout << "solve: m = " << p.m << ", n = " << p.n << ", N = " << p.grid.subintervals()
              << ", eps = " << fmt(args.eps, prec) << "\n";
    std::cout << "characteristic matrix: det = " << fmt(res.char_report.det, prec)
              << ", cond_1 = " << fmt(res.char_report.cond, prec) << "\n";
    std::cout << "c_tilde =";
    for (int j = 0; j < p.m; ++j) std::cout << " " << fmt(res.c_tilde(j), prec);
    std::cout << "\n";
    std::cout << "||y||_{n,inf} = " << fmt(sbvp::sobolev_norm(res.y, p.n), prec) << "\n";
    std::cout << "ode residual (W^{n-1}_inf) = " << fmt(res.ode_residual, prec) << "\n";
    std::cout << "boundary residual = " << fmt(res.boundary_residual, prec) << "\n";

    const std::string path = !args.out_path.empty()
                                 ? args.out_path
                                 : default_output_path(args.config_path, "_solution.csv");
    auto out = open_output(path);
    out << "t";
    for (int j = 1; j <= p.m; ++j)
        for (int k = 0; k <= p.n; ++k) out << ",y" << j << "_d" << k << "_re,y" << j << "_d" << k << "_im";
    out << "\n";
    for (int i = 0; i < p.grid.node_count(); ++i) {
        out << fmt(p.grid.node(i), prec);
        for (int j = 0; j < p.m; ++j)
            for (int k = 0; k <= p.n; ++k) {
                const sbvp::Complex z = res.y.at(j, k, i);
                out << "," << fmt(z.real(), prec) << "," << fmt(z.imag(), prec);
            }
        out << "\n";
    }
    std::cout << "node table written to " << path << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
    const auto cfg = load(args, true);
    sbvp::SweepOptions opt;
    opt.r_max = cfg.r_max;
    opt.threads = sweep_threads_from_env();
    const sbvp::SweepReport rep = sbvp::sweep(cfg.family, opt);
    const int prec = cfg.precision;

    const std::string path = !args.out_path.empty()
                                 ? args.out_path
                                 : (!cfg.csv_path.empty()
                                        ? cfg.csv_path
                                        : default_output_path(args.config_path, "_sweep.csv"));
    {
        auto out = open_output(path);
        out << "eps,error,discrepancy,ratio\n";
        for (const auto& row : rep.rows)
            out << fmt(row.eps, prec) << "," << fmt(row.error, prec) << ","
                << fmt(row.discrepancy, prec) << "," << fmt(row.ratio, prec) << "\n";
        out << "# verdict=" << (rep.pass ? "pass" : "fail") << " c0=" << (rep.cond_zero.pass ? "pass" : "fail")
            << " cI=" << (rep.cond_I.pass ? "pass" : "fail")
            << " cII=" << (rep.cond_II.pass ? "pass" : "fail")
            << " bracket=" << (rep.bracket_pass ? "pass" : "fail")
            << " ratio_min=" << fmt(rep.ratio_min, prec) << " ratio_max=" << fmt(rep.ratio_max, prec)
            << " slope=" << fmt(rep.slope, prec) << " floor=" << fmt(rep.residual_floor, prec)
            << " rmax=" << fmt(rep.r_max, prec) << (rep.degenerate ? " degenerate=true" : "") << "\n";
    }

    std::cout << "sweep: " << rep.rows.size() << " schedule points, CSV written to " << path << "\n";
    std::cout << "conditions: (0) " << pf(rep.cond_zero.pass) << ", (I) " << pf(rep.cond_I.pass)
              << ", (II) " << pf(rep.cond_II.pass) << "\n";
    if (rep.degenerate)
        std::cout << "all rows below the residual floor (degenerate sweep: family does not vary "
                     "above solver accuracy)\n";
    else
        std::cout << "error/discrepancy ratio in [" << fmt(rep.ratio_min, prec) << ", "
                  << fmt(rep.ratio_max, prec) << "], bracket width "
                  << fmt(rep.bracket_width(), prec) << " vs rmax " << fmt(rep.r_max, prec) << " => "
                  << pf(rep.bracket_pass) << "\n";
    if (!std::isnan(rep.slope)) std::cout << "error slope in eps: " << fmt(rep.slope, prec) << "\n";
    std::cout << "two-sided estimate verdict: " << pf(rep.pass) << "\n";
    return rep.pass ? kExitOk : kExitVerdict;
}

int cmd_check(const CommonArgs& args) {
    const auto cfg = load(args, false);
    const auto c0 = sbvp::check_condition_zero(cfg.family);
    const auto cI = sbvp::check_condition_I(cfg.family);
    const auto cII = sbvp::check_condition_II(cfg.family);
    print_condition(c0, cfg.precision);
    print_condition(cI, cfg.precision);
    print_condition(cII, cfg.precision);
    const bool pass = c0.pass && cI.pass && cII.pass;
    std::cout << "check: " << pf(pass) << "\n";
    return pass ? kExitOk : kExitVerdict;
}

int cmd_kernel(const CommonArgs& args) {
    const auto cfg = load(args, false);
    const sbvp::Problem p = sbvp::instantiate(cfg.family, args.eps);
    std::cout << sbvp::homogeneous_kernel_dim(p) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear boundary-value problems y' + A(t;eps) y = f, B(eps) y = c in Sobolev "
                 "spaces: solver, parameter sweeps and solvability checks"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* cmd, bool with_eps, bool with_sweep_flags) {
        cmd->add_option("config", args.config_path, "problem/family config (JSON)")->required();
        cmd->add_option("--grid-N", args.grid_N, "override grid.N from the config");
        if (with_eps) cmd->add_option("--eps", args.eps, "parameter value")->required();
        cmd->add_option("--schedule", args.schedule, "comma-separated eps schedule override");
        if (with_sweep_flags) {
            cmd->add_option("--rmax", args.r_max, "two-sided estimate bracket threshold");
        }
    };

    auto* solve_cmd = app.add_subcommand("solve", "solve the problem at a fixed eps");
    add_common(solve_cmd, true, false);
    solve_cmd->add_option("--out", args.out_path, "node table CSV path");

    auto* sweep_cmd = app.add_subcommand("sweep", "error/discrepancy sweep over the eps schedule");
    add_common(sweep_cmd, false, true);
    sweep_cmd->add_option("--out", args.out_path, "sweep CSV path");

    auto* check_cmd = app.add_subcommand("check", "check conditions (0), (I), (II)");
    add_common(check_cmd, false, false);

    auto* kernel_cmd = app.add_subcommand("kernel", "homogeneous kernel dimension at a fixed eps");
    add_common(kernel_cmd, true, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return cmd_solve(args);
        if (sweep_cmd->parsed()) return cmd_sweep(args);
        if (check_cmd->parsed()) return cmd_check(args);
        if (kernel_cmd->parsed()) return cmd_kernel(args);
        std::cerr << "error: no subcommand\n";
        return kExitInternal;
    } catch (const sbvp::SingularMatrixError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSingular;
    } catch (const sbvp::BlowUpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBlowUp;
    } catch (const sbvp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sbvp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sbvp::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sbvp::ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
