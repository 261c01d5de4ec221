#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "permlim/bridge.hpp"

namespace permlim {

// entries(i, j) = rho(i/n, j/n) for 1 <= i, j <= n (zero-based storage). This is n * R_n.
struct KernelMatrix {
    int n = 0;
    Eigen::MatrixXd entries;
    std::string source;
};

// Row defect of R_n = entries / n against the all-ones vector.
struct DefectVector {
    int n = 0;
    Eigen::VectorXd q;
    double q_bar = 0.0;
    double norm_inf = 0.0;
    // sqrt((1/n) sum q_i^2)
    double norm_2n = 0.0;
};

// Samples rho on the right-endpoint grid {i/n}. The result is symmetrised as (v + v^T)/2;
// throws GridError if the source is asymmetric beyond 1e-12 or has a negative entry.
KernelMatrix sample_kernel(const DensitySource& source, int n);

// Wraps an explicit matrix (e.g. read from file) after the same checks as sample_kernel.
KernelMatrix kernel_from_entries(Eigen::MatrixXd entries, std::string source = "matrix");

DefectVector row_defect(const KernelMatrix& kernel);

// sqrt((1/n) sum v_i^2)
double norm_2n(const Eigen::VectorXd& v);

// (1/n) sum f_values[i], with f_values[i] = f(i/n). Accumulated in extended precision.
double riemann_sum(std::span<const double> f_values);

struct RiemannResidual {
    int n;
    // R_n(f) - integral - (f(1) - f(0))/(2n), signed
    long double deviation;
    long double residual;  // |deviation|
    long double scaled;    // n^2 * deviation
};

// The residuals are O(1/n^2) and land near the rounding floor of double for n ~ 1000,
// so f, the integral and the arithmetic are all carried in long double.
std::vector<RiemannResidual> riemann_correction_check(const std::function<long double(long double)>& f,
                                                      long double integral, std::span<const int> n_list);

// Whitespace matrix format: first token n, then n*n values row-major.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);

}  // namespace permlim
