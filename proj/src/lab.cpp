#include "permlim/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "permlim/errors.hpp"
#include "permlim/grid.hpp"
#include "permlim/permanent.hpp"

namespace permlim {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

const CostFunction& require_cost(const RunConfig& cfg, std::optional<CostFunction>& storage) {
    if (!cfg.cost) throw ConfigError("missing [cost] block");
    storage = make_cost(*cfg.cost);
    return *storage;
}

void dump_eigenvalues(const std::filesystem::path& path, const Eigen::VectorXd& ev) {
    auto out = open_output(path);
    for (double v : ev) out << num(v) << '\n';
}

// Runs task(i) for i in [0, count) on up to `workers` threads. Exceptions are kept per index.
template <class Task>
std::vector<std::exception_ptr> parallel_for(std::size_t count, unsigned workers, Task task) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    return errors;
}

}  // namespace

RateFit fit_rate(const std::vector<int>& ns, const std::vector<double>& errs, double exact_tol) {
    RateFit fit;
    if (ns.empty() || ns.size() != errs.size()) return fit;
    if (std::all_of(errs.begin(), errs.end(), [&](double e) { return e <= exact_tol; })) {
        fit.status = RateFit::Status::exact;
        return fit;
    }
    std::vector<int> sorted(ns);
    std::sort(sorted.begin(), sorted.end());
    const int median = sorted[(sorted.size() - 1) / 2];
    fit.min_n = median;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < median || !(errs[i] > 0) || !std::isfinite(errs[i])) continue;
        double x = std::log(double(ns[i])), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    fit.points = k;
    double denom = k * sxx - sx * sx;
    if (k < 2 || denom <= 0) return fit;
    double slope = (k * sxy - sx * sy) / denom;
    fit.alpha = -slope;
    fit.log_c = (sy - slope * sx) / k;
    fit.status = RateFit::Status::fitted;
    return fit;
}

StudySource prepare_source(const RunConfig& cfg, std::ostream& log) {
    if (cfg.kernel && cfg.cost) throw ConfigError("give either a [cost] block or a [kernel] block, not both");
    if (cfg.kernel) return {make_kernel_source(*cfg.kernel), std::nullopt, std::nullopt};
    if (!cfg.cost) throw ConfigError("missing [cost] or [kernel] block");
    CostFunction cost = make_cost(*cfg.cost);
    auto sol = std::make_shared<PotentialSolution>(solve_potential(cost, cfg.bridge));
    log << "bridge: m = " << sol->m << ", iterations = " << sol->iterations << ", residual = " << sol->final_residual
        << ", gamma0 = " << num(sol->gamma0) << '\n';
    return {DensitySource::bridge(sol, cost), cost, *sol};
}

int run_validate_cost(const RunConfig& cfg, std::ostream& out) {
    std::optional<CostFunction> storage;
    const auto& cost = require_cost(cfg, storage);
    auto report = validate_cost(cost, cfg.study.validate_grid, cfg.study.validate_tol);
    out << cost.describe() << '\n';
    print_report(out, report);
    return report.any_fail() ? static_cast<int>(ExitCode::validation) : 0;
}

int run_solve_bridge(const RunConfig& cfg, std::ostream& out) {
    std::optional<CostFunction> storage;
    const auto& cost = require_cost(cfg, storage);
    auto sol = solve_potential(cost, cfg.bridge);
    out << "cost: " << cost.describe() << '\n'
        << "m: " << sol.m << '\n'
        << "iterations: " << sol.iterations << '\n'
        << "damping: " << sol.damping_used << '\n'
        << "residual: " << num(sol.final_residual) << '\n'
        << "gamma0: " << num(sol.gamma0) << '\n';
    if (!cfg.output.csv_path.empty()) {
        auto csv = open_output(cfg.output.csv_path);
        write_potential_csv(csv, sol);
        out << "potential written to " << cfg.output.csv_path.string() << '\n';
    }
    return 0;
}

void write_converge_csv_row(std::ostream& out, const ConvergenceRecord& r) {
    const auto& d = r.diagnostics;
    out << r.n << ',' << num(r.D_n) << ',' << num(r.D_n_hat) << ',' << num(r.L_n_scaled) << ',' << num(r.mccullagh)
        << ',' << num(r.fredholm_limit) << ',' << num(r.err_Dn) << ',' << num(r.err_ratio_mcc) << ','
        << num(d.norm_2n_h) << ',' << num(d.norm_inf_h) << ',' << num(d.sum_log) << ',' << num(d.m_n) << ','
        << num(r.wall_ms_permanent) << ',' << num(r.wall_ms_balance) << '\n';
}

int run_converge(const RunConfig& cfg, std::ostream& out, ConvergenceStudy* result) {
    const auto& study = cfg.study;
    if (study.n_list.empty()) throw ConfigError("[study] n_list is required for converge");
    for (int n : study.n_list)
        if (n > study.permanent_cap)
            throw ConfigError("[study] n = " + std::to_string(n) + " exceeds permanent_cap = " +
                              std::to_string(study.permanent_cap));

    StudySource src = prepare_source(cfg, out);
    ConvergenceStudy res;
    if (src.potential) res.gamma0 = src.potential->gamma0;
    res.fredholm = fredholm_limit(src.density, study.nystrom_m, study.eig_cutoff, study.refinement_tol);
    const double limit = res.fredholm.value;
    out << "fredholm limit: " << num(limit) << " (m = " << study.nystrom_m << "; m = " << 2 * study.nystrom_m
        << " gives " << num(res.fredholm.refined_value) << (res.fredholm.converged ? "" : ", NOT converged")
        << "), lambda* = " << num(res.fredholm.lambda_star) << '\n';

    const std::size_t count = study.n_list.size();
    const unsigned outer = std::max(1U, std::min<unsigned>(study.workers, static_cast<unsigned>(count)));
    PermanentOptions popt;
    popt.cap = study.permanent_cap;
    popt.method = study.permanent_method;
    popt.workers = std::max(1U, study.workers / outer);

    std::vector<ConvergenceRecord> records(count);
    auto errors = parallel_for(count, outer, [&](std::size_t i) {
        ConvergenceRecord& r = records[i];
        r.n = study.n_list[i];
        auto t0 = Clock::now();
        KernelMatrix kernel = sample_kernel(src.density, r.n);
        BalanceResult bal = balance_fixed_point(kernel, study.balance_tol, study.balance_max_iter);
        r.wall_ms_balance = ms_since(t0);

        auto t1 = Clock::now();
        r.D_n = compute_Dn(kernel, popt).value;
        r.D_n_hat = compute_Dn_hat(bal, popt).value;
        r.L_n_scaled = std::numeric_limits<double>::quiet_NaN();
        if (src.cost) r.L_n_scaled = compute_Ln(*src.cost, r.n, popt).value * std::exp(r.n * src.potential->gamma0);
        r.wall_ms_permanent = ms_since(t1);

        SpectrumReport spec = spectrum_report(bal, limit);
        r.mccullagh = spec.mccullagh_value;
        r.bn_eigenvalues = std::move(spec.eigenvalues);
        r.fredholm_limit = limit;
        r.err_Dn = std::fabs(r.D_n - limit);
        r.err_ratio_mcc = std::fabs(r.mccullagh / r.D_n_hat - 1.0);
        r.diagnostics = balance_diagnostics(bal);
    });

    std::ofstream csv;
    if (!study.n_list.empty() && !cfg.output.csv_path.empty()) {
        csv = open_output(cfg.output.csv_path);
        csv << kConvergeCsvHeader << '\n';
    }
    out << std::setw(5) << "n" << std::setw(22) << "D_n" << std::setw(22) << "D_n_hat" << std::setw(22)
        << "mccullagh" << std::setw(14) << "err_Dn" << std::setw(14) << "err_mcc" << '\n';
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) {
            if (csv.is_open()) {
                csv << "# aborted at n=" << study.n_list[i] << '\n';
                csv.flush();
            }
            out << "aborted at n = " << study.n_list[i] << '\n';
            std::rethrow_exception(errors[i]);
        }
        const auto& r = records[i];
        if (csv.is_open()) write_converge_csv_row(csv, r);
        out << std::setw(5) << r.n << std::setw(22) << num(r.D_n) << std::setw(22) << num(r.D_n_hat)
            << std::setw(22) << num(r.mccullagh) << std::setw(14) << std::setprecision(4) << r.err_Dn
            << std::setw(14) << r.err_ratio_mcc << std::setprecision(6) << '\n';
    }

    std::vector<double> errs;
    for (const auto& r : records) errs.push_back(r.err_Dn);
    res.rate = fit_rate(study.n_list, errs);
    switch (res.rate.status) {
    case RateFit::Status::exact: out << "rate: exact\n"; break;
    case RateFit::Status::skipped: out << "rate: skipped (fewer than two usable points)\n"; break;
    case RateFit::Status::fitted:
        out << "rate: alpha = " << num(res.rate.alpha) << " (fit over n >= " << res.rate.min_n << ", "
            << res.rate.points << " points)\n";
        break;
    }

    if (cfg.output.eigen_dump) {
        dump_eigenvalues(cfg.output.eigen_dump_path, res.fredholm.eigenvalues);
        for (const auto& r : records)
            dump_eigenvalues(cfg.output.eigen_dump_path.string() + ".n" + std::to_string(r.n), r.bn_eigenvalues);
    }
    res.records = std::move(records);
    if (result) *result = std::move(res);
    return 0;
}

int run_balance_study(const RunConfig& cfg, std::ostream& out, BalanceStudy* result) {
    const auto& study = cfg.study;
    if (study.n_list.empty()) throw ConfigError("[study] n_list is required for balance-study");
    StudySource src = prepare_source(cfg, out);

    BalanceStudy res;
    res.rows.resize(study.n_list.size());
    auto errors = parallel_for(study.n_list.size(), study.workers, [&](std::size_t i) {
        auto& row = res.rows[i];
        row.n = study.n_list[i];
        KernelMatrix kernel = sample_kernel(src.density, row.n);
        BalanceResult bal = balance_fixed_point(kernel, study.balance_tol, study.balance_max_iter);
        row.diagnostics = balance_diagnostics(bal);
        row.max_row_sum_dev = max_row_sum_deviation(bal);
        row.iterations = bal.iterations;
        const double n = row.n;
        const auto& d = row.diagnostics;
        row.scaled[0] = n * d.norm_2n_h;
        row.scaled[1] = std::sqrt(n) * d.norm_inf_h;
        row.scaled[2] = n * std::fabs(d.sum_log);
        row.scaled[3] = n * n * std::fabs(d.m_n);
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (errors[i]) {
            out << "aborted at n = " << study.n_list[i] << '\n';
            std::rethrow_exception(errors[i]);
        }

    for (int c = 0; c < 4; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& row : res.rows) {
            lo = std::min(lo, row.scaled[c]);
            hi = std::max(hi, row.scaled[c]);
        }
        res.ratios[c] = hi == 0.0 ? 1.0 : hi / lo;
    }

    std::ofstream csv;
    if (!cfg.output.csv_path.empty()) {
        csv = open_output(cfg.output.csv_path);
        csv << "n,h_norm_2n,h_norm_inf,sum_log,m_n,prod_u_sq,max_row_sum_dev,n_h_norm_2n,sqrt_n_h_norm_inf,"
               "n_abs_sum_log,n2_abs_m_n\n";
    }
    out << std::setw(6) << "n" << std::setw(6) << "iter";
    for (const char* name : kScaledColumns) out << std::setw(22) << name;
    out << std::setw(16) << "row_sum_dev" << '\n';
    for (const auto& row : res.rows) {
        const auto& d = row.diagnostics;
        if (csv.is_open())
            csv << row.n << ',' << num(d.norm_2n_h) << ',' << num(d.norm_inf_h) << ',' << num(d.sum_log) << ','
                << num(d.m_n) << ',' << num(d.prod_u_sq) << ',' << num(row.max_row_sum_dev) << ','
                << num(row.scaled[0]) << ',' << num(row.scaled[1]) << ',' << num(row.scaled[2]) << ','
                << num(row.scaled[3]) << '\n';
        out << std::setw(6) << row.n << std::setw(6) << row.iterations;
        for (double v : row.scaled) out << std::setw(22) << num(v);
        out << std::setw(16) << std::setprecision(3) << row.max_row_sum_dev << std::setprecision(6) << '\n';
    }
    out << "max/min ratio:";
    for (int c = 0; c < 4; ++c) out << "  " << kScaledColumns[c] << " = " << num(res.ratios[c]);
    out << '\n';
    if (result) *result = std::move(res);
    return 0;
}

int dispatch(const std::string& subcommand, const std::string& config_path, std::ostream& out, std::ostream& err,
             std::optional<unsigned> workers) {
    try {
        RunConfig cfg = load_run_config(config_path);
        if (workers) cfg.study.workers = std::max(1U, *workers);
        if (subcommand == "validate-cost") return run_validate_cost(cfg, out);
        if (subcommand == "solve-bridge") return run_solve_bridge(cfg, out);
        if (subcommand == "converge") return run_converge(cfg, out);
        if (subcommand == "balance-study") return run_balance_study(cfg, out);
        err << "error: unknown subcommand '" << subcommand << "'\n";
        return static_cast<int>(ExitCode::config);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::config);
    }
}

}  // namespace permlim
