#include "permlim/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "bilinear.hpp"
#include "permlim/errors.hpp"

namespace permlim {

namespace {

// log((1/m) sum_j exp(-c_j - a_j)), shifted so that no term overflows.
template <class CostRow>
double log_mean_exp(const CostRow& c, const std::vector<double>& a) {
    const auto m = a.size();
    double lo = c(0) + a[0];
    for (std::size_t j = 1; j < m; ++j) lo = std::min(lo, c(j) + a[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(lo - c(j) - a[j]);
    return -lo + std::log(s / static_cast<double>(m));
}

double max_exponent(const Eigen::MatrixXd& c, const std::vector<double>& a) {
    const auto m = static_cast<Eigen::Index>(a.size());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            worst = std::max(worst, std::fabs(c(i, j) + a[i] + a[j]));
    return worst;
}

}  // namespace

PotentialSolution solve_potential(const CostFunction& cost, const BridgeOptions& opt) {
    if (opt.m < 8) throw DomainError("solve_potential needs m >= 8");
    if (!(opt.tol > 0.0)) throw DomainError("solve_potential needs tol > 0");
    if (opt.max_iter < 1) throw DomainError("solve_potential needs max_iter >= 1");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
    if (cost.smoothness() == Smoothness::C0)
        Warnings::emit("cost " + cost.describe() + " is only C0; the limit theorem assumes C2");

    const int m = opt.m;
    PotentialSolution sol;
    sol.m = m;
    sol.nodes.resize(m);
    for (int i = 0; i < m; ++i) sol.nodes[i] = (i + 0.5) / m;

    Eigen::MatrixXd c(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            c(i, j) = cost(sol.nodes[i], sol.nodes[j]);
            if (!std::isfinite(c(i, j)) || std::fabs(c(i, j)) > opt.exponent_bound)
                throw BridgeError("cost value out of the safe exponent range at node pair (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")",
                                  std::numeric_limits<double>::infinity(), 0);
        }

    auto apply = [&](const std::vector<double>& a, std::vector<double>& f) {
        for (int i = 0; i < m; ++i) f[i] = log_mean_exp([&](std::size_t j) { return c(i, j); }, a);
    };
    auto residual = [&](const std::vector<double>& a, const std::vector<double>& f) {
        double r = 0.0;
        for (int i = 0; i < m; ++i) r = std::max(r, std::fabs(std::expm1(f[i] - a[i])));
        return r;
    };

    std::vector<double> a(m, 0.0), f(m), a_prev, f_prev;
    double theta = opt.damping;
    double r_prev = std::numeric_limits<double>::infinity();
    int updates = 0;
    apply(a, f);
    double r = residual(a, f);
    sol.residual_trace.push_back(r);

    while (r > opt.tol) {
        if (updates >= opt.max_iter) {
            std::ostringstream msg;
            msg << "potential solver did not converge in " << opt.max_iter << " iterations (residual " << r << ")";
            throw BridgeError(msg.str(), r, updates);
        }
        if (r > r_prev && theta > opt.min_damping) {
            // Residual went up: discard the step and retry from the previous iterate.
            theta = std::max(theta / 2, opt.min_damping);
            a = a_prev;
            f = f_prev;
            r = r_prev;
            sol.residual_trace.pop_back();
        } else {
            a_prev = a;
            f_prev = f;
            r_prev = r;
        }
        for (int i = 0; i < m; ++i) a[i] = (1 - theta) * a[i] + theta * f[i];
        ++updates;
        if (max_exponent(c, a) > opt.exponent_bound)
            throw BridgeError("exponent -c - a(x) - a(y) left the safe range", r, updates);
        apply(a, f);
        r = residual(a, f);
        sol.residual_trace.push_back(r);
    }

    sol.a_values = std::move(a);
    sol.iterations = updates;
    sol.final_residual = r;
    sol.damping_used = theta;
    sol.gamma0 = gamma0(sol);
    return sol;
}

double potential_at(const PotentialSolution& sol, const CostFunction& cost, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("potential evaluated outside [0,1]");
    return log_mean_exp([&](std::size_t j) { return cost(x, sol.nodes[j]); }, sol.a_values);
}

double evaluate_density(const PotentialSolution& sol, const CostFunction& cost, double x, double y) {
    return std::exp(-cost(x, y) - potential_at(sol, cost, x) - potential_at(sol, cost, y));
}

double gamma0(const PotentialSolution& sol) {
    double s = 0.0;
    for (double v : sol.a_values) s += v;
    double g = -2.0 * s / static_cast<double>(sol.a_values.size());
    return g == 0.0 ? 0.0 : g;  // no negative zero in reports
}

double marginal_residual(const PotentialSolution& sol, const CostFunction& cost) {
    const auto m = sol.a_values.size();
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            s += std::exp(-cost(sol.nodes[i], sol.nodes[j]) - sol.a_values[i] - sol.a_values[j]);
        r = std::max(r, std::fabs(s / static_cast<double>(m) - 1.0));
    }
    return r;
}

void write_potential_csv(std::ostream& out, const PotentialSolution& sol) {
    out << "node,a_value\n";
    char buf[64];
    for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", sol.nodes[i], sol.a_values[i]);
        out << buf;
    }
}

DensitySource DensitySource::bridge(std::shared_ptr<const PotentialSolution> sol, CostFunction cost) {
    if (!sol || sol->a_values.empty()) throw DomainError("bridge density needs a solved potential");
    DensitySource s(Kind::bridge);
    s.sol_ = std::move(sol);
    s.cost_ = std::make_shared<const CostFunction>(std::move(cost));
    return s;
}

DensitySource DensitySource::constant() { return DensitySource(Kind::constant); }

DensitySource DensitySource::cosine(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("cosine kernel needs 0 <= eps < 1");
    DensitySource s(Kind::cosine);
    s.eps_ = eps;
    return s;
}

DensitySource DensitySource::tabulated(Eigen::MatrixXd table) {
    if (table.rows() < 2 || table.rows() != table.cols())
        throw DomainError("tabulated kernel needs a square table with at least 2 nodes per side");
    DensitySource s(Kind::tabulated);
    s.table_ = std::make_shared<const Eigen::MatrixXd>(std::move(table));
    return s;
}

double DensitySource::operator()(double x, double y) const {
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0))
        throw DomainError("density evaluated outside [0,1]^2");
    switch (kind_) {
    case Kind::bridge: return evaluate_density(*sol_, *cost_, x, y);
    case Kind::constant: return 1.0;
    case Kind::cosine:
        return 1.0 + 2.0 * eps_ * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y);
    case Kind::tabulated: return detail::bilinear(*table_, x, y);
    }
    return 0.0;
}

Eigen::MatrixXd DensitySource::sample(std::span<const double> points) const {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd out(n, n);
    if (kind_ == Kind::bridge) {
        // The potential costs O(m) per point, so evaluate it once per grid point.
        std::vector<double> a(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) a[i] = potential_at(*sol_, *cost_, points[i]);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                out(i, j) = std::exp(-(*cost_)(points[i], points[j]) - a[i] - a[j]);
        return out;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = (*this)(points[i], points[j]);
    return out;
}

bool DensitySource::is_smooth() const noexcept {
    switch (kind_) {
    case Kind::bridge: return cost_->smoothness() == Smoothness::C2;
    case Kind::tabulated: return false;
    default: return true;
    }
}

std::string DensitySource::describe() const {
    switch (kind_) {
    case Kind::bridge: return "bridge[" + cost_->describe() + ", m=" + std::to_string(sol_->m) + "]";
    case Kind::constant: return "constant";
    case Kind::cosine: {
        std::ostringstream s;
        s << "cosine(eps=" << eps_ << ")";
        return s.str();
    }
    case Kind::tabulated: return "tabulated(m=" + std::to_string(table_->rows()) + ")";
    }
    return "unknown";
}

}  // namespace permlim
