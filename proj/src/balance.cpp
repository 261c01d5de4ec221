#include "permlim/balance.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "permlim/errors.hpp"

namespace permlim {

std::string to_string(BalanceMethod method) {
    return method == BalanceMethod::fixed_point ? "fixed-point" : "symmetric-scaling";
}

namespace {

constexpr double kBallRadius = 0.5;
constexpr double kSingularRcond = 1e-14;

void check_balanceable(const KernelMatrix& kernel) {
    if (kernel.n < 1 || kernel.entries.rows() != kernel.n) throw BalanceError("malformed kernel matrix");
    if (kernel.entries.minCoeff() < 0.0) throw BalanceError("kernel has negative entries");
    Eigen::VectorXd rows = kernel.entries.rowwise().sum();
    for (int i = 0; i < kernel.n; ++i)
        if (!(rows(i) > 0.0)) throw BalanceError("kernel row " + std::to_string(i + 1) + " is zero; balancing impossible");
}

BalanceResult finish(const KernelMatrix& kernel, Eigen::VectorXd h, BalanceMethod method, int iterations,
                     double residual) {
    BalanceResult res;
    res.n = kernel.n;
    res.u = Eigen::VectorXd::Ones(kernel.n) + h;
    res.h = std::move(h);
    if (res.u.minCoeff() <= 0.0) throw BalanceError("scaling vector has a nonpositive entry", residual);
    // u_i u_j is formed first so the result stays exactly symmetric
    res.balanced = kernel.entries.cwiseProduct(res.u * res.u.transpose());
    res.method = method;
    res.iterations = iterations;
    res.residual = residual;
    return res;
}

}  // namespace

Eigen::VectorXd fixed_point_residual(const KernelMatrix& kernel, const Eigen::VectorXd& h) {
    const double n = kernel.n;
    Eigen::VectorXd Rh = kernel.entries * h / n;
    Eigen::VectorXd q = kernel.entries.rowwise().sum() / n - Eigen::VectorXd::Ones(kernel.n);
    return h + Rh + q + h.cwiseProduct(q) + h.cwiseProduct(Rh);
}

BalanceResult balance_fixed_point(const KernelMatrix& kernel, double tol, int max_iter) {
    check_balanceable(kernel);
    const int n = kernel.n;
    const Eigen::MatrixXd R = kernel.entries / double(n);
    const Eigen::VectorXd q = kernel.entries.rowwise().sum() / double(n) - Eigen::VectorXd::Ones(n);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) + R);
    if (!(lu.rcond() > kSingularRcond))
        throw BalanceError("I + R_n is numerically singular at n = " + std::to_string(n) +
                           " (spectral gap assumption fails)");

    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    double r2 = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd Rh = R * h;
        h = -lu.solve(q + h.cwiseProduct(q) + h.cwiseProduct(Rh));
        if (norm_2n(h) > kBallRadius) {
            std::ostringstream msg;
            msg << "fixed-point iterate left the ball ||h||_{2,n} <= 1/2 at n = " << n << " (iteration " << it << ")";
            throw BalanceError(msg.str(), norm_2n(h));
        }
        Eigen::VectorXd res = fixed_point_residual(kernel, h);
        r2 = norm_2n(res);
        if (r2 <= tol && res.cwiseAbs().maxCoeff() <= 10 * tol) {
            auto out = finish(kernel, std::move(h), BalanceMethod::fixed_point, it, r2);
            if (max_row_sum_deviation(out) > 10 * tol)
                throw BalanceError("balanced matrix row sums deviate from 1 beyond 10 tol", r2);
            return out;
        }
    }
    std::ostringstream msg;
    msg << "fixed-point balancing did not converge in " << max_iter << " iterations (residual " << r2 << ")";
    throw BalanceError(msg.str(), r2);
}

BalanceResult balance_symmetric_scaling(const KernelMatrix& kernel, double tol, int max_iter) {
    check_balanceable(kernel);
    const int n = kernel.n;
    const Eigen::MatrixXd& K = kernel.entries;
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    double dev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd Ru = K * u / double(n);
        if (!(Ru.minCoeff() > 0.0)) throw BalanceError("symmetric scaling produced a nonpositive row product");
        u = u.cwiseQuotient(Ru).cwiseSqrt();
        dev = (u.cwiseProduct(K * u / double(n)) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
        if (dev <= tol) return finish(kernel, u - Eigen::VectorXd::Ones(n), BalanceMethod::symmetric_scaling, it, dev);
    }
    std::ostringstream msg;
    msg << "symmetric scaling did not converge in " << max_iter << " iterations (deviation " << dev << ")";
    throw BalanceError(msg.str(), dev);
}

double max_row_sum_deviation(const BalanceResult& result) {
    Eigen::VectorXd rows = result.balanced.rowwise().sum() / double(result.n);
    return (rows - Eigen::VectorXd::Ones(result.n)).cwiseAbs().maxCoeff();
}

BalanceDiagnostics balance_diagnostics(const BalanceResult& result) {
    BalanceDiagnostics d;
    d.norm_2n_h = norm_2n(result.h);
    d.norm_inf_h = result.h.size() ? result.h.cwiseAbs().maxCoeff() : 0.0;
    long double sum_log = 0.0L, prod = 1.0L;
    for (Eigen::Index i = 0; i < result.h.size(); ++i) {
        sum_log += std::log1p(result.h(i));
        prod *= static_cast<long double>(result.u(i)) * result.u(i);
    }
    d.sum_log = static_cast<double>(sum_log);
    d.m_n = result.h.size() ? result.h.mean() : 0.0;
    d.prod_u_sq = static_cast<double>(prod);
    return d;
}

}  // namespace permlim
