#pragma once

#include <Eigen/Core>

#include "permlim/balance.hpp"
#include "permlim/bridge.hpp"

namespace permlim {

// Eigenvalues of a symmetric matrix in ascending order. Throws SpectralError if
// max |M - M^T| > 1e-10.
Eigen::VectorXd eigen_symmetric(const Eigen::MatrixXd& m);

// B_n = A_n - J_n with A_n = balanced / n. Throws SpectralError unless
// max|B_n J_n| and max|J_n B_n| are both <= 1e-10.
Eigen::MatrixXd bn_matrix(const BalanceResult& balance);

// det(I + J_n - A^T A)^{-1/2} for a doubly stochastic A. For symmetric A the value is
// cross-checked against det(I - B_n^2)^{-1/2}. Throws SpectralError when the row or column
// sums are off by more than 1e-10, when a non-trivial eigenvalue has modulus >= 1 - 1e-8,
// or when the two determinants disagree beyond 1e-9 relative.
double mccullagh_estimate(const Eigen::MatrixXd& a);

// prod_k (1 - lambda_k^2), skipping |lambda_k| <= cutoff.
double det_one_minus_square(const Eigen::VectorXd& eigenvalues, double cutoff = 0.0);

// C_ij = (rho(z_i, z_j) - 1)/m on the midpoint nodes z_i = (i - 1/2)/m.
Eigen::MatrixXd centered_nystrom(const DensitySource& source, int m);

struct FredholmEstimate {
    int m = 0;
    Eigen::VectorXd eigenvalues;  // of the centred Nystrom matrix at resolution m, ascending
    double lambda_star = 0.0;
    // det_F(I - (T|_H)^2)^{-1/2} estimated at m, and again at 2m
    double value = 1.0;
    double refined_value = 1.0;
    bool converged = true;
};

// Throws SpectralError if some Nystrom eigenvalue has modulus >= 1. Disagreement between the
// m and 2m estimates beyond refinement_tol (relative) clears `converged` and emits a warning.
FredholmEstimate fredholm_limit(const DensitySource& source, int m, double eig_cutoff = 1e-12,
                                double refinement_tol = 1e-5);

struct GapCheck {
    double lambda_star = 0.0;
    bool warning = false;
};

constexpr double kGapWarnThreshold = 0.99;

// Largest |eigenvalue| of the centred Nystrom matrix; warns at or above 0.99.
GapCheck spectral_gap_check(const DensitySource& source, int m);

struct SpectrumReport {
    int n = 0;
    Eigen::VectorXd eigenvalues;  // of B_n, ascending
    double lambda_star = 0.0;
    double det_I_minus_B2 = 1.0;
    double mccullagh_value = 1.0;
    double fredholm_limit = 1.0;
};

SpectrumReport spectrum_report(const BalanceResult& balance, double fredholm_limit);

}  // namespace permlim
