#pragma once

#include <string>

#include <Eigen/Core>

#include "permlim/grid.hpp"

namespace permlim {

enum class BalanceMethod { fixed_point, symmetric_scaling };
std::string to_string(BalanceMethod method);

// Symmetric scaling u = 1 + h with diag(u) R_n diag(u) doubly stochastic.
struct BalanceResult {
    int n = 0;
    Eigen::VectorXd h;
    Eigen::VectorXd u;
    // u_i * entries(i, j) * u_j, i.e. n * A_n
    Eigen::MatrixXd balanced;
    BalanceMethod method = BalanceMethod::fixed_point;
    int iterations = 0;
    double residual = 0.0;
};

struct BalanceDiagnostics {
    double norm_2n_h = 0.0;
    double norm_inf_h = 0.0;
    double sum_log = 0.0;    // sum log(1 + h_i)
    double m_n = 0.0;        // mean of h
    double prod_u_sq = 1.0;  // prod u_i^2, multiplied out directly
};

// Iterates h <- -(I + R_n)^{-1} (q_n + h o q_n + h o (R_n h)) from h = 0, with one LU
// factorisation of I + R_n. Stops once the equation residual is <= tol in the normalised
// 2-norm and <= 10 tol in the max norm. Throws BalanceError on a zero row, a singular
// I + R_n, an iterate with ||h||_{2,n} > 1/2, or non-convergence.
BalanceResult balance_fixed_point(const KernelMatrix& kernel, double tol = 1e-12, int max_iter = 500);

// Geometric-mean symmetric scaling u <- sqrt(u / (R_n u)) from u = 1, stopped when
// max_i |u_i (R_n u)_i - 1| <= tol. Independent check on balance_fixed_point.
BalanceResult balance_symmetric_scaling(const KernelMatrix& kernel, double tol = 1e-12, int max_iter = 100000);

// Residual of (I + R_n) h + q_n + h o q_n + h o (R_n h); its entries are u_i (R_n u)_i - 1.
Eigen::VectorXd fixed_point_residual(const KernelMatrix& kernel, const Eigen::VectorXd& h);

// max_i | (1/n) sum_j balanced(i, j) - 1 |
double max_row_sum_deviation(const BalanceResult& result);

BalanceDiagnostics balance_diagnostics(const BalanceResult& result);

}  // namespace permlim
