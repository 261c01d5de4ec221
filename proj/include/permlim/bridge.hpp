#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "permlim/cost.hpp"

namespace permlim {

struct BridgeOptions {
    int m = 400;
    double tol = 1e-10;
    int max_iter = 10000;
    // theta in a <- (1 - theta) a + theta F(a). theta = 1 oscillates on the constant mode.
    double damping = 0.5;
    double min_damping = 1.0 / 16.0;
    double exponent_bound = 700.0;
};

// Discrete Schrodinger potential on the midpoint nodes (i - 1/2)/m.
struct PotentialSolution {
    int m = 0;
    std::vector<double> nodes;
    std::vector<double> a_values;
    double gamma0 = 0.0;
    int iterations = 0;
    double final_residual = 0.0;
    double damping_used = 1.0;
    // Residual of every accepted iterate, starting from a = 0.
    std::vector<double> residual_trace;
};

// Solves exp(a(x_i)) = (1/m) sum_j exp(-c(x_i, y_j) - a(y_j)) by damped fixed-point
// iteration from a = 0, halving the damping (down to min_damping) whenever the
// rho-marginal residual increases. Throws BridgeError on non-convergence or when an
// exponent leaves [-exponent_bound, exponent_bound].
PotentialSolution solve_potential(const CostFunction& cost, const BridgeOptions& options = {});

// Off-node potential by the Nystrom extension a(x) = log (1/m) sum_j exp(-c(x, y_j) - a_j).
// At the nodes it reproduces a_values to within the solve tolerance.
double potential_at(const PotentialSolution& sol, const CostFunction& cost, double x);

// exp(-c(x,y) - a(x) - a(y)) with a extended off the nodes as in potential_at.
double evaluate_density(const PotentialSolution& sol, const CostFunction& cost, double x, double y);

// -2 * (1/m) sum_j a_j.
double gamma0(const PotentialSolution& sol);

// max_i | (1/m) sum_j exp(-c(x_i, y_j) - a_i - a_j) - 1 |, computed from a_values as stored.
double marginal_residual(const PotentialSolution& sol, const CostFunction& cost);

void write_potential_csv(std::ostream& out, const PotentialSolution& sol);

// A kernel rho on [0,1]^2 that can be sampled on a grid.
class DensitySource {
public:
    enum class Kind { bridge, constant, cosine, tabulated };

    static DensitySource bridge(std::shared_ptr<const PotentialSolution> sol, CostFunction cost);
    static DensitySource constant();
    // 1 + 2 eps cos(pi x) cos(pi y). The centred operator is rank one with eigenvalue eps.
    // Nonnegative for eps <= 1/2; larger eps (< 1) is admitted for spectral checks only.
    static DensitySource cosine(double eps);
    // Bilinear interpolation of an m x m table on the nodes k/(m-1).
    static DensitySource tabulated(Eigen::MatrixXd table);

    double operator()(double x, double y) const;
    // (rho(p_i, p_j))_{ij}
    Eigen::MatrixXd sample(std::span<const double> points) const;

    Kind kind() const noexcept { return kind_; }
    bool is_smooth() const noexcept;
    std::string describe() const;
    const PotentialSolution* potential() const noexcept { return sol_.get(); }
    const CostFunction* cost() const noexcept { return cost_.get(); }

private:
    explicit DensitySource(Kind kind) : kind_(kind) {}

    Kind kind_;
    double eps_ = 0.0;
    std::shared_ptr<const PotentialSolution> sol_;
    std::shared_ptr<const CostFunction> cost_;
    std::shared_ptr<const Eigen::MatrixXd> table_;
};

}  // namespace permlim
