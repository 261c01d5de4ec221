#include "permlim/grid.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "permlim/errors.hpp"

namespace permlim {

namespace {

constexpr double kSymmetryTol = 1e-12;

void check_entries(const Eigen::MatrixXd& v) {
    if (v.rows() != v.cols() || v.rows() == 0) throw GridError("kernel matrix must be square and nonempty");
    if (!v.allFinite()) throw GridError("kernel matrix has non-finite entries");
    double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if (asym > kSymmetryTol * scale) {
        std::ostringstream msg;
        msg << "kernel is not symmetric (max |v - v^T| = " << asym << ")";
        throw GridError(msg.str());
    }
    if (v.minCoeff() < 0.0) {
        std::ostringstream msg;
        msg << "kernel has a negative entry (" << v.minCoeff() << ")";
        throw GridError(msg.str());
    }
}

}  // namespace

KernelMatrix kernel_from_entries(Eigen::MatrixXd entries, std::string source) {
    check_entries(entries);
    KernelMatrix k;
    k.n = static_cast<int>(entries.rows());
    k.entries = 0.5 * (entries + entries.transpose());
    k.source = std::move(source);
    return k;
}

KernelMatrix sample_kernel(const DensitySource& source, int n) {
    if (n < 1) throw DomainError("sample_kernel needs n >= 1");
    if (!source.is_smooth())
        Warnings::emit("density " + source.describe() + " is not C2; rate statements may not apply");
    std::vector<double> points(n);
    for (int i = 0; i < n; ++i) points[i] = double(i + 1) / n;
    return kernel_from_entries(source.sample(points), source.describe());
}

double norm_2n(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

DefectVector row_defect(const KernelMatrix& kernel) {
    DefectVector d;
    d.n = kernel.n;
    d.q = kernel.entries.rowwise().sum() / double(kernel.n) - Eigen::VectorXd::Ones(kernel.n);
    d.q_bar = d.q.mean();
    d.norm_inf = d.q.cwiseAbs().maxCoeff();
    d.norm_2n = norm_2n(d.q);
    return d;
}

double riemann_sum(std::span<const double> f_values) {
    long double s = 0.0L;
    for (double v : f_values) s += v;
    return static_cast<double>(s / static_cast<long double>(f_values.size()));
}

std::vector<RiemannResidual> riemann_correction_check(const std::function<long double(long double)>& f,
                                                      long double integral, std::span<const int> n_list) {
    const long double f0 = f(0.0L), f1 = f(1.0L);
    std::vector<RiemannResidual> out;
    for (int n : n_list) {
        if (n < 1) throw DomainError("riemann_correction_check needs positive n");
        const long double nl = n;
        // Kahan-compensated sum of f(j/n).
        long double s = 0.0L, comp = 0.0L;
        for (int j = 1; j <= n; ++j) {
            long double y = f(static_cast<long double>(j) / nl) - comp;
            long double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        long double dev = s / nl - integral - (f1 - f0) / (2.0L * nl);
        out.push_back({n, dev, std::fabs(dev), nl * nl * dev});
    }
    return out;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    out << m.rows() << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    long n = 0;
    if (!(in >> n) || n < 1) throw ConfigError("matrix file: first token must be the size n >= 1");
    Eigen::MatrixXd m(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            if (!(in >> m(i, j))) throw ConfigError("matrix file: expected " + std::to_string(n * n) + " values");
    return m;
}

}  // namespace permlim
