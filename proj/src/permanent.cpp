#include "permlim/permanent.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "permlim/errors.hpp"

namespace permlim {

std::string to_string(PermanentMethod method) {
    switch (method) {
    case PermanentMethod::ryser: return "ryser";
    case PermanentMethod::glynn: return "glynn";
    case PermanentMethod::brute: return "brute";
    }
    return "unknown";
}

namespace {

using Real = long double;

// Number of Gray-code blocks; fixed so that the summation order never depends on workers.
constexpr int kBlockBits = 6;

struct Compensated {
    Real sum = 0, comp = 0;
    void add(Real v) {
        Real y = v - comp;
        Real t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// Both formulas reduce to sum_{g} (-1)^{|g|} prod_k (base_k + sum_{b in g} step_{b,k}) over the
// Gray codes g of length bits = n - 1, where step_{b,k} is the contribution of flipping bit b
// to coordinate k. The caller supplies base and steps and rescales the total.
class GraySum {
public:
    GraySum(int n, std::vector<Real> base, std::vector<Real> steps)
        : n_(n), bits_(n - 1), base_(std::move(base)), steps_(std::move(steps)) {}

    Real block(std::uint64_t begin, std::uint64_t end) const {
        std::vector<Real> v(base_);
        std::uint64_t g = begin ^ (begin >> 1);
        for (int b = 0; b < bits_; ++b)
            if (g >> b & 1U)
                for (int k = 0; k < n_; ++k) v[k] += steps_[std::size_t(b) * n_ + k];
        int sign = std::popcount(g) % 2 ? -1 : 1;

        Compensated acc;
        for (std::uint64_t idx = begin;;) {
            Real p = 1;
            for (int k = 0; k < n_; ++k) p *= v[k];
            acc.add(sign > 0 ? p : -p);
            if (++idx >= end) break;
            int b = std::countr_zero(idx);
            const Real* step = &steps_[std::size_t(b) * n_];
            g ^= std::uint64_t{1} << b;
            if (g >> b & 1U)
                for (int k = 0; k < n_; ++k) v[k] += step[k];
            else
                for (int k = 0; k < n_; ++k) v[k] -= step[k];
            sign = -sign;
        }
        return acc.sum;
    }

    Real total(unsigned workers) const {
        const std::uint64_t length = std::uint64_t{1} << bits_;
        const int block_bits = std::min(kBlockBits, bits_);
        const std::uint64_t blocks = std::uint64_t{1} << block_bits;
        const std::uint64_t width = length / blocks;
        std::vector<Real> partial(blocks, 0);

        std::atomic<std::uint64_t> next{0};
        auto run = [&] {
            for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) partial[b] = block(b * width, (b + 1) * width);
        };
        workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
        if (workers == 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
            for (auto& t : pool) t.join();
        }
        Compensated acc;
        for (Real p : partial) acc.add(p);
        return acc.sum;
    }

private:
    int n_;
    int bits_;
    std::vector<Real> base_;
    std::vector<Real> steps_;
};

// Glynn: per(A) = 2^{1-n} sum_{delta_0 = +1} (prod delta) prod_j sum_i delta_i a_ij.
// Bit b of the Gray code flips delta_{b+1} from +1 to -1.
Real glynn(const Eigen::MatrixXd& a, unsigned workers) {
    const int n = static_cast<int>(a.rows());
    std::vector<Real> base(n, 0), steps(std::size_t(n - 1) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) base[j] += a(i, j);
    for (int b = 0; b < n - 1; ++b)
        for (int j = 0; j < n; ++j) steps[std::size_t(b) * n + j] = -2 * static_cast<Real>(a(b + 1, j));
    return std::ldexp(GraySum(n, std::move(base), std::move(steps)).total(workers), 1 - n);
}

// Ryser in the Nijenhuis-Wilf form: per(A) = (-1)^{n-1} 2 sum_{S subset of first n-1 columns}
// (-1)^{|S|} prod_i (x_i + sum_{j in S} a_ij), x_i = a_{i,n-1} - (1/2) sum_j a_ij.
// The centring keeps the terms from cancelling catastrophically.
Real ryser(const Eigen::MatrixXd& a, unsigned workers) {
    const int n = static_cast<int>(a.rows());
    std::vector<Real> base(n), steps(std::size_t(n - 1) * n);
    for (int i = 0; i < n; ++i) {
        Real row = 0;
        for (int j = 0; j < n; ++j) row += a(i, j);
        base[i] = a(i, n - 1) - row / 2;
    }
    for (int b = 0; b < n - 1; ++b)
        for (int i = 0; i < n; ++i) steps[std::size_t(b) * n + i] = a(i, b);
    Real s = 2 * GraySum(n, std::move(base), std::move(steps)).total(workers);
    return (n - 1) % 2 ? -s : s;
}

Real brute(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Compensated acc;
    do {
        Real p = 1;
        for (int i = 0; i < n; ++i) p *= a(i, perm[i]);
        acc.add(p);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc.sum;
}

void check_input(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 1) throw PermanentError("permanent needs a nonempty square matrix");
    if (!m.allFinite()) throw PermanentError("permanent input has non-finite entries");
}

PermanentValue make_value(int n, Real total, PermanentMethod method, bool normalized) {
    PermanentValue v;
    v.n = n;
    v.value = static_cast<double>(total);
    v.log_value = total > 0 ? static_cast<double>(std::log(total)) : std::numeric_limits<double>::quiet_NaN();
    v.method = method;
    v.normalized = normalized;
    return v;
}

}  // namespace

PermanentValue permanent_exact(const Eigen::MatrixXd& m, PermanentMethod method, const PermanentOptions& opt) {
    check_input(m);
    const int n = static_cast<int>(m.rows());
    if (method == PermanentMethod::brute) return permanent_brute(m);
    if (n > opt.cap)
        throw PermanentError("permanent of order " + std::to_string(n) + " exceeds the cap " + std::to_string(opt.cap));
    if (n > 62) throw PermanentError("permanent order beyond the 64-bit Gray-code range");
    if (n > opt.warn_above)
        Warnings::emit("exact permanent of order " + std::to_string(n) + " enumerates 2^" + std::to_string(n - 1) +
                       " terms; expect a long run");
    Real total = method == PermanentMethod::ryser ? ryser(m, opt.workers) : glynn(m, opt.workers);
    return make_value(n, total, method, false);
}

PermanentValue permanent_brute(const Eigen::MatrixXd& m) {
    check_input(m);
    const int n = static_cast<int>(m.rows());
    if (n > 9) throw PermanentError("brute-force permanent is limited to n <= 9");
    return make_value(n, brute(m), PermanentMethod::brute, false);
}

PermanentValue permanent_normalized(const Eigen::MatrixXd& m, const PermanentOptions& opt) {
    check_input(m);
    Eigen::MatrixXd scaled = m;
    for (Eigen::Index k = 0; k < scaled.rows(); ++k) scaled.row(k) /= double(k + 1);
    PermanentValue v = permanent_exact(scaled, opt.method, opt);
    v.normalized = true;
    return v;
}

PermanentValue compute_Dn(const KernelMatrix& kernel, const PermanentOptions& opt) {
    return permanent_normalized(kernel.entries, opt);
}

PermanentValue compute_Dn_hat(const BalanceResult& balance, const PermanentOptions& opt) {
    return permanent_normalized(balance.balanced, opt);
}

PermanentValue compute_Ln(const CostFunction& cost, int n, const PermanentOptions& opt) {
    if (n < 1) throw DomainError("compute_Ln needs n >= 1");
    if (n > opt.cap)
        throw PermanentError("permanent of order " + std::to_string(n) + " exceeds the cap " + std::to_string(opt.cap));
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = std::exp(-cost(double(i + 1) / n, double(j + 1) / n));
    return permanent_normalized(m, opt);
}

}  // namespace permlim
