#include "permlim/cost.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "bilinear.hpp"
#include "permlim/errors.hpp"
#include "permlim/expression.hpp"

namespace permlim {

std::string to_string(CostFamily family) {
    switch (family) {
    case CostFamily::quadratic: return "quadratic";
    case CostFamily::absolute: return "absolute";
    case CostFamily::tabulated: return "tabulated";
    case CostFamily::custom_expression: return "expression";
    }
    return "unknown";
}

std::string to_string(CheckStatus status) {
    switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
    }
    return "unknown";
}

CostFunction::CostFunction(CostFamily family, std::vector<double> params, Smoothness smoothness,
                           std::function<double(double, double)> eval, std::string label)
    : family_(family),
      params_(std::move(params)),
      smoothness_(smoothness),
      eval_(std::move(eval)),
      label_(std::move(label)) {}

CostFunction CostFunction::quadratic(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("quadratic cost needs beta >= 0");
    return {CostFamily::quadratic, {beta}, Smoothness::C2,
            [beta](double x, double y) { return beta * (x - y) * (x - y); },
            "quadratic(beta=" + std::to_string(beta) + ")"};
}

CostFunction CostFunction::absolute(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("absolute cost needs beta >= 0");
    return {CostFamily::absolute, {beta}, Smoothness::C0,
            [beta](double x, double y) { return beta * std::fabs(x - y); },
            "absolute(beta=" + std::to_string(beta) + ")"};
}

CostFunction CostFunction::tabulated(Eigen::MatrixXd table) {
    if (table.rows() < 2 || table.rows() != table.cols())
        throw DomainError("tabulated cost needs a square table with at least 2 nodes per side");
    const auto m = table.rows();
    auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(table));
    auto eval = [shared](double x, double y) { return detail::bilinear(*shared, x, y); };
    return {CostFamily::tabulated, {}, Smoothness::C0, eval,
            "tabulated(m=" + std::to_string(m) + ")"};
}

CostFunction CostFunction::expression(const std::string& text, std::vector<double> params,
                                      Smoothness claim) {
    Expression expr(text, params);
    return {CostFamily::custom_expression, std::move(params), claim,
            [expr](double x, double y) { return expr(x, y); }, "expression(" + text + ")"};
}

double CostFunction::operator()(double x, double y) const {
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
        std::ostringstream msg;
        msg << "cost evaluated outside [0,1]^2 at (" << x << ", " << y << ")";
        throw DomainError(msg.str());
    }
    return eval_(x, y);
}

std::string CostFunction::describe() const { return label_; }

double evaluate_cost(const CostFunction& cost, double x, double y) { return cost(x, y); }

Eigen::MatrixXd read_cost_table(std::istream& in) {
    long m = 0;
    if (!(in >> m) || m < 2) throw ConfigError("cost table: first token must be the size m >= 2");
    Eigen::MatrixXd t(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j)
            if (!(in >> t(i, j)))
                throw ConfigError("cost table: expected " + std::to_string(m * m) + " values");
    return t;
}

bool ValidationReport::any_fail() const {
    return std::any_of(checks.begin(), checks.end(),
                       [](const CostCheck& c) { return c.status == CheckStatus::fail; });
}

const CostCheck& ValidationReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
}

ValidationReport validate_cost(const CostFunction& cost, int grid_size, double tol) {
    if (grid_size < 2) throw DomainError("validate_cost needs grid_size >= 2");
    const int g = grid_size;
    Eigen::MatrixXd v(g + 1, g + 1);
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j) v(i, j) = cost(double(i) / g, double(j) / g);

    double negative = 0, asym = 0, diag = 0, reflect = 0, nonfinite = 0;
    for (int i = 0; i <= g; ++i) {
        for (int j = 0; j <= g; ++j) {
            double c = v(i, j);
            if (!std::isfinite(c)) {
                nonfinite += 1;
                continue;
            }
            negative = std::max(negative, -c);
            if (std::isfinite(v(j, i))) asym = std::max(asym, std::fabs(c - v(j, i)));
            if (std::isfinite(v(g - i, g - j))) reflect = std::max(reflect, std::fabs(c - v(g - i, g - j)));
        }
        if (std::isfinite(v(i, i))) diag = std::max(diag, std::fabs(v(i, i)));
    }

    auto status = [tol](double violation, CheckStatus on_violation) {
        return violation > tol ? on_violation : CheckStatus::pass;
    };
    ValidationReport report;
    report.grid_size = grid_size;
    report.checks = {
        {"nonnegativity", status(negative, CheckStatus::fail), negative},
        {"symmetry", status(asym, CheckStatus::fail), asym},
        {"finiteness", nonfinite > 0 ? CheckStatus::fail : CheckStatus::pass, nonfinite},
        {"diagonal", status(diag, CheckStatus::warn), diag},
        {"reflection", status(reflect, CheckStatus::warn), reflect},
        {"smoothness", cost.smoothness() == Smoothness::C2 ? CheckStatus::pass : CheckStatus::warn, 0.0},
    };
    return report;
}

void print_report(std::ostream& out, const ValidationReport& report) {
    out << "cost validation on grid " << report.grid_size << '\n';
    for (const auto& c : report.checks)
        out << "  " << c.name << ": " << to_string(c.status) << " (max violation " << c.max_violation << ")\n";
}

}  // namespace permlim
