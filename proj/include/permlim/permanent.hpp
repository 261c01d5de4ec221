#pragma once

#include <string>

#include <Eigen/Core>

#include "permlim/balance.hpp"
#include "permlim/cost.hpp"
#include "permlim/grid.hpp"

namespace permlim {

enum class PermanentMethod { ryser, glynn, brute };
std::string to_string(PermanentMethod method);

struct PermanentOptions {
    int cap = 26;
    PermanentMethod method = PermanentMethod::glynn;
    // Worker threads for the subset sum. The result does not depend on this value.
    unsigned workers = 1;
    int warn_above = 22;
};

struct PermanentValue {
    int n = 0;
    // per(M), or per(M)/n! when normalized
    double value = 0.0;
    // log(value); NaN when value <= 0
    double log_value = 0.0;
    PermanentMethod method = PermanentMethod::glynn;
    bool normalized = false;
};

// Exact permanent by Ryser's formula (Nijenhuis-Wilf centred form) or Glynn's formula,
// both over a Gray-code enumeration of 2^(n-1) terms accumulated in long double.
// The enumeration is cut into a fixed number of contiguous blocks that may run on
// several workers; block totals are added in block order.
PermanentValue permanent_exact(const Eigen::MatrixXd& m, PermanentMethod method = PermanentMethod::glynn,
                               const PermanentOptions& options = {});

// Sum over all n! permutations. n <= 9.
PermanentValue permanent_brute(const Eigen::MatrixXd& m);

// per(m)/n!, computed by dividing row k by k before the permanent.
PermanentValue permanent_normalized(const Eigen::MatrixXd& m, const PermanentOptions& options = {});

// per(rho(i/n, j/n))/n!
PermanentValue compute_Dn(const KernelMatrix& kernel, const PermanentOptions& options = {});
// per(u_i rho_ij u_j)/n!
PermanentValue compute_Dn_hat(const BalanceResult& balance, const PermanentOptions& options = {});
// per(exp(-c(i/n, j/n)))/n!
PermanentValue compute_Ln(const CostFunction& cost, int n, const PermanentOptions& options = {});

}  // namespace permlim
