#include "permlim/spectral.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "permlim/errors.hpp"

namespace permlim {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kStochasticTol = 1e-10;
constexpr double kGapMargin = 1e-8;
constexpr double kIdentityTol = 1e-9;

Eigen::MatrixXd centered(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    return a - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
}

double max_modulus(const Eigen::MatrixXd& b) {
    if (b.size() == 0) return 0.0;
    if ((b - b.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol) return eigen_symmetric(b).cwiseAbs().maxCoeff();
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::VectorXd eigen_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw SpectralError("eigen_symmetric needs a square matrix");
    if (m.size() == 0) return {};
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol) {
        std::ostringstream msg;
        msg << "eigen_symmetric: matrix is not symmetric (max |M - M^T| = " << asym << ")";
        throw SpectralError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SpectralError("symmetric eigensolver did not converge");
    return es.eigenvalues();
}

Eigen::MatrixXd bn_matrix(const BalanceResult& balance) {
    const int n = balance.n;
    Eigen::MatrixXd b = centered(balance.balanced / double(n));
    // (B J)_ij = rowsum_i(B)/n and (J B)_ij = colsum_j(B)/n
    double bj = (b.rowwise().sum() / double(n)).cwiseAbs().maxCoeff();
    double jb = (b.colwise().sum() / double(n)).cwiseAbs().maxCoeff();
    if (bj > 1e-10 || jb > 1e-10) {
        std::ostringstream msg;
        msg << "B_n J_n = J_n B_n = 0 fails (" << bj << ", " << jb << "); input is not balanced";
        throw SpectralError(msg.str());
    }
    return b;
}

double det_one_minus_square(const Eigen::VectorXd& eigenvalues, double cutoff) {
    long double p = 1.0L;
    for (double l : eigenvalues)
        if (std::fabs(l) > cutoff) p *= 1.0L - static_cast<long double>(l) * l;
    return static_cast<double>(p);
}

double mccullagh_estimate(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw SpectralError("mccullagh_estimate needs a square matrix");
    const auto n = a.rows();
    double rows = (a.rowwise().sum() - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
    double cols = (a.colwise().sum() - Eigen::RowVectorXd::Ones(n)).cwiseAbs().maxCoeff();
    if (rows > kStochasticTol || cols > kStochasticTol) {
        std::ostringstream msg;
        msg << "mccullagh_estimate: matrix is not doubly stochastic (row dev " << rows << ", column dev " << cols << ")";
        throw SpectralError(msg.str());
    }

    Eigen::MatrixXd b = centered(a);
    double lam = max_modulus(b);
    if (lam >= 1.0 - kGapMargin) {
        std::ostringstream msg;
        msg << "non-trivial eigenvalue of modulus " << lam << " violates the spectral gap hypothesis";
        throw SpectralError(msg.str());
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Constant(n, n, 1.0 / double(n)) -
                        a.transpose() * a;
    Eigen::VectorXd ev = eigen_symmetric(0.5 * (m + m.transpose()));
    long double det = 1.0L;
    for (double v : ev) det *= v;
    if (!(det > 0)) throw SpectralError("det(I + J - A^T A) is not positive");
    double value = static_cast<double>(1.0L / std::sqrt(det));

    if ((a - a.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol) {
        double via_b = det_one_minus_square(eigen_symmetric(b));
        if (std::fabs(static_cast<double>(det) / via_b - 1.0) > kIdentityTol) {
            std::ostringstream msg;
            msg << "det(I + J - A^2) = " << static_cast<double>(det) << " disagrees with det(I - B^2) = " << via_b;
            throw SpectralError(msg.str());
        }
    }
    return value;
}

Eigen::MatrixXd centered_nystrom(const DensitySource& source, int m) {
    std::vector<double> z(m);
    for (int i = 0; i < m; ++i) z[i] = (i + 0.5) / m;
    Eigen::MatrixXd c = source.sample(z);
    c.array() -= 1.0;
    c /= double(m);
    return 0.5 * (c + c.transpose());
}

namespace {

struct Level {
    Eigen::VectorXd eigenvalues;
    double lambda_star;
    double value;
};

Level nystrom_level(const DensitySource& source, int m, double cutoff) {
    Level lv;
    lv.eigenvalues = eigen_symmetric(centered_nystrom(source, m));
    lv.lambda_star = lv.eigenvalues.size() ? lv.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    if (lv.lambda_star >= 1.0) {
        std::ostringstream msg;
        msg << "centred operator has an eigenvalue of modulus " << lv.lambda_star << " >= 1 at m = " << m;
        throw SpectralError(msg.str());
    }
    lv.value = 1.0 / std::sqrt(det_one_minus_square(lv.eigenvalues, cutoff));
    return lv;
}

}  // namespace

FredholmEstimate fredholm_limit(const DensitySource& source, int m, double eig_cutoff, double refinement_tol) {
    if (m < 32) throw DomainError("fredholm_limit needs m >= 32");
    Level coarse = nystrom_level(source, m, eig_cutoff);
    Level fine = nystrom_level(source, 2 * m, eig_cutoff);
    FredholmEstimate est;
    est.m = m;
    est.eigenvalues = std::move(coarse.eigenvalues);
    est.lambda_star = coarse.lambda_star;
    est.value = coarse.value;
    est.refined_value = fine.value;
    est.converged = std::fabs(coarse.value - fine.value) <= refinement_tol * std::fabs(fine.value);
    if (!est.converged) {
        std::ostringstream msg;
        msg << "Fredholm estimate not converged: m = " << m << " gives " << coarse.value << ", m = " << 2 * m
            << " gives " << fine.value;
        Warnings::emit(msg.str());
    }
    return est;
}

GapCheck spectral_gap_check(const DensitySource& source, int m) {
    if (m < 32) throw DomainError("spectral_gap_check needs m >= 32");
    Eigen::VectorXd ev = eigen_symmetric(centered_nystrom(source, m));
    GapCheck g;
    g.lambda_star = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    g.warning = g.lambda_star >= kGapWarnThreshold;
    if (g.warning) {
        std::ostringstream msg;
        msg << "spectral gap nearly closed for " << source.describe() << ": lambda* = " << g.lambda_star;
        Warnings::emit(msg.str());
    }
    return g;
}

SpectrumReport spectrum_report(const BalanceResult& balance, double fredholm) {
    SpectrumReport r;
    r.n = balance.n;
    r.eigenvalues = eigen_symmetric(bn_matrix(balance));
    r.lambda_star = r.eigenvalues.size() ? r.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    r.det_I_minus_B2 = det_one_minus_square(r.eigenvalues);
    r.mccullagh_value = mccullagh_estimate(balance.balanced / double(balance.n));
    r.fredholm_limit = fredholm;
    return r;
}

}  // namespace permlim
