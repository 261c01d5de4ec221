#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace permlim {

enum class CostFamily { quadratic, absolute, tabulated, custom_expression };
enum class Smoothness { C2, C0 };

std::string to_string(CostFamily family);

// A cost c : [0,1]^2 -> [0,inf). Immutable after construction and cheap to copy.
class CostFunction {
public:
    // beta * (x - y)^2. beta = 0 gives the zero cost.
    static CostFunction quadratic(double beta);
    // beta * |x - y|. Only C0 on the diagonal.
    static CostFunction absolute(double beta);
    // Bilinear interpolation of an m x m table whose node (k, l) sits at (k/(m-1), l/(m-1)).
    static CostFunction tabulated(Eigen::MatrixXd table);
    static CostFunction expression(const std::string& text, std::vector<double> params = {},
                                   Smoothness claim = Smoothness::C2);

    // Evaluates c(x, y). Throws DomainError for arguments outside [0,1].
    double operator()(double x, double y) const;

    CostFamily family() const noexcept { return family_; }
    const std::vector<double>& params() const noexcept { return params_; }
    Smoothness smoothness() const noexcept { return smoothness_; }
    std::string describe() const;

private:
    CostFunction(CostFamily family, std::vector<double> params, Smoothness smoothness,
                 std::function<double(double, double)> eval, std::string label);

    CostFamily family_;
    std::vector<double> params_;
    Smoothness smoothness_;
    std::function<double(double, double)> eval_;
    std::string label_;
};

double evaluate_cost(const CostFunction& cost, double x, double y);

// Reads the tabulated-grid file: first token m, then m*m values row-major.
Eigen::MatrixXd read_cost_table(std::istream& in);

enum class CheckStatus { pass, warn, fail };
std::string to_string(CheckStatus status);

struct CostCheck {
    std::string name;
    CheckStatus status;
    double max_violation;
};

struct ValidationReport {
    std::vector<CostCheck> checks;
    int grid_size = 0;

    bool any_fail() const;
    const CostCheck& check(const std::string& name) const;
};

// Checks nonnegativity, symmetry and finiteness (fail) and the diagonal, reflection and
// smoothness conditions (warn only) on the grid {i/grid_size : 0 <= i <= grid_size}.
ValidationReport validate_cost(const CostFunction& cost, int grid_size, double tol);

void print_report(std::ostream& out, const ValidationReport& report);

}  // namespace permlim
