#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "permlim/balance.hpp"
#include "permlim/config.hpp"
#include "permlim/spectral.hpp"

namespace permlim {

// Exact CSV header written by the converge subcommand.
inline constexpr const char* kConvergeCsvHeader =
    "n,D_n,D_n_hat,L_n_scaled,mccullagh,fredholm_limit,err_Dn,err_ratio_mcc,h_norm_2n,h_norm_inf,sum_log,m_n,"
    "wall_ms_permanent,wall_ms_balance";

struct ConvergenceRecord {
    int n = 0;
    double D_n = 0.0;
    double D_n_hat = 0.0;
    double L_n_scaled = 0.0;  // L_n exp(n Gamma_0); NaN for synthetic kernels
    double mccullagh = 0.0;
    double fredholm_limit = 0.0;
    double err_Dn = 0.0;         // |D_n - fredholm_limit|
    double err_ratio_mcc = 0.0;  // |mccullagh / D_n_hat - 1|
    BalanceDiagnostics diagnostics;
    Eigen::VectorXd bn_eigenvalues;
    double wall_ms_permanent = 0.0;
    double wall_ms_balance = 0.0;
};

struct RateFit {
    enum class Status { fitted, exact, skipped };
    Status status = Status::skipped;
    double alpha = 0.0;      // err ~ C n^{-alpha}
    double log_c = 0.0;
    int min_n = 0;           // smallest n used in the fit
    int points = 0;
};

// Least-squares fit of log err = log C - alpha log n over the entries with n >= the median of
// ns (element (size-1)/2). Status is exact when every err <= exact_tol, skipped when fewer
// than two usable points remain.
RateFit fit_rate(const std::vector<int>& ns, const std::vector<double>& errs, double exact_tol = 1e-11);

struct ConvergenceStudy {
    std::vector<ConvergenceRecord> records;
    FredholmEstimate fredholm;
    RateFit rate;
    std::optional<double> gamma0;
};

struct BalanceStudyRow {
    int n = 0;
    BalanceDiagnostics diagnostics;
    double max_row_sum_dev = 0.0;
    int iterations = 0;
    // n ||h||_{2,n}, sqrt(n) ||h||_inf, n |sum log(1+h)|, n^2 |m_n|
    double scaled[4] = {0, 0, 0, 0};
};

struct BalanceStudy {
    std::vector<BalanceStudyRow> rows;
    double ratios[4] = {1, 1, 1, 1};  // max/min of each scaled column
};

inline constexpr const char* kScaledColumns[4] = {"n*h_norm_2n", "sqrt(n)*h_norm_inf", "n*|sum_log|", "n^2*|m_n|"};

// The density a study runs on: the [kernel] block if present, otherwise the bridge solution
// for the [cost] block.
struct StudySource {
    DensitySource density;
    std::optional<CostFunction> cost;
    std::optional<PotentialSolution> potential;
};

StudySource prepare_source(const RunConfig& cfg, std::ostream& log);

// Each run_* returns the process exit code and throws permlim::Error on failure.
int run_validate_cost(const RunConfig& cfg, std::ostream& out);
int run_solve_bridge(const RunConfig& cfg, std::ostream& out);
int run_converge(const RunConfig& cfg, std::ostream& out, ConvergenceStudy* result = nullptr);
int run_balance_study(const RunConfig& cfg, std::ostream& out, BalanceStudy* result = nullptr);

// Loads the config, runs the subcommand, prints errors to err and maps them to exit codes.
int dispatch(const std::string& subcommand, const std::string& config_path, std::ostream& out, std::ostream& err,
             std::optional<unsigned> workers = std::nullopt);

void write_converge_csv_row(std::ostream& out, const ConvergenceRecord& r);

}  // namespace permlim
