#ifndef EOTR_FROBENIUS_HPP
#define EOTR_FROBENIUS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <eotr/errors.hpp>
#include <eotr/matrix.hpp>
#include <eotr/rational.hpp>

namespace eotr
{

// Semisimple datum at a fixed point t, everything expressed in flat coordinates.
struct CanonicalData
{
    int N = 0;
    std::vector<Rat> u;
    Mat eta;
    Mat psi;
    std::vector<Rat> unit;
    std::optional<std::vector<Rat>> theta;
};

struct Diagnostic
{
    std::string check;
    bool ok = true;
    std::string detail;
};

struct Diagnostics
{
    std::vector<Diagnostic> items;

    bool ok() const
    {
        for (const auto &d : items) {
            if (!d.ok) {
                return false;
            }
        }
        return true;
    }
    const Diagnostic *first_failure() const
    {
        for (const auto &d : items) {
            if (!d.ok) {
                return &d;
            }
        }
        return nullptr;
    }
    void add(std::string check, bool ok, std::string detail = {})
    {
        items.push_back({std::move(check), ok, std::move(detail)});
    }
    std::string summary() const
    {
        std::ostringstream os;
        for (const auto &d : items) {
            os << (d.ok ? "ok   " : "FAIL ") << d.check;
            if (!d.detail.empty()) {
                os << ": " << d.detail;
            }
            os << "\n";
        }
        return os.str();
    }
};

// R(z) = R_0 + R_1 z + ... + R_L z^L in the canonical frame.
struct RMatrix
{
    int N = 0;
    int L = 0;
    std::vector<Mat> mats;

    static RMatrix identity(int n, int l)
    {
        RMatrix r{n, l, std::vector<Mat>(static_cast<std::size_t>(l) + 1, Mat(n, n))};
        r.mats[0] = Mat::identity(n);
        return r;
    }
    const Mat &operator[](int k) const { return mats.at(static_cast<std::size_t>(k)); }
    Mat &operator[](int k) { return mats.at(static_cast<std::size_t>(k)); }

    friend bool operator==(const RMatrix &, const RMatrix &) = default;
};

// V_kl for k, l >= 0 with k + l <= K.
struct VTable
{
    int N = 0;
    int K = -1;
    std::vector<std::vector<Mat>> v; // v[k][l], l <= K - k

    bool has(int k, int l) const { return k >= 0 && l >= 0 && k + l <= K; }
    const Mat &at(int k, int l) const
    {
        if (!has(k, l)) {
            throw window_error("VTable: V_" + std::to_string(k) + std::to_string(l) + " outside computed range k+l <= " +
                                   std::to_string(K),
                               k + l + 1);
        }
        return v[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
    }
};

namespace detail
{
inline std::string entry_text(const char *what, std::size_t i, std::size_t j, const Rat &got, const Rat &want)
{
    std::ostringstream os;
    os << what << "[" << i << "][" << j << "] = " << got.str() << ", expected " << want.str();
    return os.str();
}

// First entry where a and b differ, as text; empty when equal.
inline std::string first_diff(const char *what, const Mat &a, const Mat &b)
{
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a(i, j) != b(i, j)) {
                return entry_text(what, i, j, a(i, j), b(i, j));
            }
        }
    }
    return {};
}
} // namespace detail

inline Diagnostics validate_canonical(const CanonicalData &d)
{
    Diagnostics diag;
    const auto n = static_cast<std::size_t>(d.N > 0 ? d.N : 0);
    const bool dims = d.N >= 1 && d.u.size() == n && d.eta.rows() == n && d.eta.cols() == n && d.psi.rows() == n &&
                      d.psi.cols() == n && d.unit.size() == n && (!d.theta || d.theta->size() == n);
    diag.add("dimensions", dims, dims ? "" : "N must be positive and all fields must have dimension N");
    if (!dims) {
        return diag;
    }

    std::string coincident;
    for (std::size_t i = 0; i < n && coincident.empty(); ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (d.u[i] == d.u[j]) {
                coincident = "coincident critical values u[" + std::to_string(i) + "] = u[" + std::to_string(j) +
                             "] = " + d.u[i].str();
                break;
            }
        }
    }
    diag.add("distinct critical values", coincident.empty(), coincident);

    const std::string asym = detail::first_diff("eta", d.eta, d.eta.transpose());
    diag.add("eta symmetric", asym.empty(), asym);

    const Rat det = determinant(d.eta);
    diag.add("eta invertible", !det.is_zero(), det.is_zero() ? "det eta = 0" : "");

    const std::string iso = detail::first_diff("psi^T eta psi", d.psi.transpose() * d.eta * d.psi, Mat::identity(n));
    diag.add("psi^T eta psi = I", iso.empty(), iso);
    return diag;
}

inline Diagnostics check_symplectic(const RMatrix &R)
{
    Diagnostics diag;
    const auto n = static_cast<std::size_t>(R.N);
    if (R.mats.size() != static_cast<std::size_t>(R.L) + 1) {
        diag.add("shape", false, "expected L+1 matrices");
        return diag;
    }
    const std::string r0 = detail::first_diff("R_0", R[0], Mat::identity(n));
    diag.add("R_0 = I", r0.empty(), r0);
    for (int m = 1; m <= R.L; ++m) {
        Mat s(n, n);
        for (int a = 0; a <= m; ++a) {
            Mat t = R[a] * R[m - a].transpose();
            s += (sign_pow(m - a) < 0) ? t * Rat(-1) : t;
        }
        const std::string bad = detail::first_diff("sum", s, Mat(n, n));
        diag.add("symplectic order " + std::to_string(m), bad.empty(), bad);
        if (!bad.empty()) {
            break;
        }
    }
    return diag;
}

namespace detail
{
// Truncated matrix power series product.
inline std::vector<Mat> series_mul(const std::vector<Mat> &a, const std::vector<Mat> &b, int L, std::size_t n)
{
    std::vector<Mat> r(static_cast<std::size_t>(L) + 1, Mat(n, n));
    for (int i = 0; i <= L; ++i) {
        if (a[static_cast<std::size_t>(i)].is_zero()) {
            continue;
        }
        for (int j = 0; i + j <= L; ++j) {
            r[static_cast<std::size_t>(i + j)] += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
        }
    }
    return r;
}
} // namespace detail

// exp(A(z)) with A_k^T = (-1)^{k+1} A_k and entries p/q, |p| <= bound, 1 <= q <= bound.
// Draws are taken straight from mt19937_64 output so the result is identical on
// every platform.
inline RMatrix random_symplectic_r(int N, int L, std::uint64_t seed, int coeff_bound = 3)
{
    if (N < 1 || L < 0 || coeff_bound < 1) {
        throw std::invalid_argument("random_symplectic_r: need N >= 1, L >= 0, coeff_bound >= 1");
    }
    const auto n = static_cast<std::size_t>(N);
    std::mt19937_64 gen(seed);
    const auto bound = static_cast<std::uint64_t>(coeff_bound);
    auto draw = [&] {
        const long p = static_cast<long>(gen() % (2 * bound + 1)) - coeff_bound;
        const long q = static_cast<long>(gen() % bound) + 1;
        return Rat(p, q);
    };

    std::vector<Mat> A(static_cast<std::size_t>(L) + 1, Mat(n, n));
    for (int k = 1; k <= L; ++k) {
        Mat &a = A[static_cast<std::size_t>(k)];
        const bool symmetric = (k % 2 == 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                if (i == j && !symmetric) {
                    continue;
                }
                const Rat x = draw();
                a(i, j) = x;
                a(j, i) = symmetric ? x : -x;
            }
        }
    }

    // A has no constant term, so A^p contributes only from order p on.
    std::vector<Mat> result(static_cast<std::size_t>(L) + 1, Mat(n, n));
    result[0] = Mat::identity(n);
    std::vector<Mat> power = result;
    for (int p = 1; p <= L; ++p) {
        power = detail::series_mul(power, A, L, n);
        const Rat inv_fact = Rat(1) / Rat(mpz_class(mpz_class::factorial(static_cast<unsigned long>(p))));
        for (int k = p; k <= L; ++k) {
            result[static_cast<std::size_t>(k)] += power[static_cast<std::size_t>(k)] * inv_fact;
        }
    }
    return RMatrix{N, L, std::move(result)};
}

// Solves [U, R_{k+1}] = (Theta - k) R_k order by order, Theta = psi^{-1} theta psi.
// Diagonals at even orders come from the symplectic condition; at odd orders
// they are taken from diag_seeds[m-1] (zero when absent). No symplectic check.
inline RMatrix solve_r_recursion(const CanonicalData &d, int L, const std::vector<std::vector<Rat>> &diag_seeds = {})
{
    if (!d.theta) {
        throw validation_error("complete_r: datum has no theta");
    }
    if (L < 0) {
        throw std::invalid_argument("complete_r: L must be nonnegative");
    }
    const auto n = static_cast<std::size_t>(d.N);
    const auto psi_inv = inverse(d.psi);
    if (!psi_inv) {
        throw validation_error("complete_r: psi is singular");
    }
    Mat theta(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        theta(i, i) = (*d.theta)[i];
    }
    const Mat Theta = *psi_inv * theta * d.psi;

    RMatrix R = RMatrix::identity(d.N, L);
    for (int k = 0; k < L; ++k) {
        const Mat rhs = (Theta - Mat::identity(n) * Rat(k)) * R[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (!rhs(i, i).is_zero()) {
                throw consistency_error("complete_r: diag((Theta - " + std::to_string(k) + ") R_" + std::to_string(k) +
                                        ")[" + std::to_string(i) + "] = " + rhs(i, i).str() +
                                        " is nonzero; datum not integrable");
            }
        }
        const int m = k + 1;
        Mat &next = R[m];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) {
                    next(i, j) = rhs(i, j) / (d.u[i] - d.u[j]);
                }
            }
        }
        if (m % 2 == 0) {
            // R_m + R_m^T + sum_{0<a<m} (-1)^{m-a} R_a R_{m-a}^T = 0 fixes the diagonal.
            Mat mid(n, n);
            for (int a = 1; a < m; ++a) {
                Mat t = R[a] * R[m - a].transpose();
                mid += (sign_pow(m - a) < 0) ? t * Rat(-1) : t;
            }
            for (std::size_t i = 0; i < n; ++i) {
                next(i, i) = -mid(i, i) / Rat(2);
            }
        } else if (static_cast<std::size_t>(m - 1) < diag_seeds.size()) {
            const auto &seed = diag_seeds[static_cast<std::size_t>(m - 1)];
            if (seed.size() != n) {
                throw validation_error("complete_r: diag_seeds entry for order " + std::to_string(m) +
                                       " has wrong length");
            }
            for (std::size_t i = 0; i < n; ++i) {
                next(i, i) = seed[i];
            }
        }
    }
    return R;
}

inline RMatrix complete_r(const CanonicalData &d, int L, const std::vector<std::vector<Rat>> &diag_seeds = {})
{
    RMatrix R = solve_r_recursion(d, L, diag_seeds);
    const Diagnostics diag = check_symplectic(R);
    if (!diag.ok()) {
        throw consistency_error("complete_r: result violates the symplectic condition (" +
                                diag.first_failure()->check + ": " + diag.first_failure()->detail + ")");
    }
    return R;
}

// Sum V_kl w^k z^l = (1 - R^T(-w) R(-z)) / (z + w), for k + l <= K.
inline VTable compute_vkl(const RMatrix &R, int K)
{
    if (K > R.L - 1) {
        throw window_error("compute_vkl: V_kl with k+l = " + std::to_string(K) + " needs truncation order " +
                               std::to_string(K + 1) + ", have " + std::to_string(R.L),
                           K + 1);
    }
    const auto n = static_cast<std::size_t>(R.N);
    // num_{a,b}: coefficient of w^a z^b in the numerator.
    auto num = [&](int a, int b) {
        Mat m = R[a].transpose() * R[b] * Rat(-sign_pow(a + b));
        if (a == 0 && b == 0) {
            m += Mat::identity(n);
        }
        return m;
    };
    // Divisibility by (z + w): the numerator must vanish on z = -w through total degree K + 1.
    for (int m = 0; m <= K + 1; ++m) {
        Mat s(n, n);
        for (int a = 0; a <= m; ++a) {
            Mat t = num(a, m - a);
            s += (sign_pow(m - a) < 0) ? t * Rat(-1) : t;
        }
        if (!s.is_zero()) {
            throw consistency_error("compute_vkl: numerator not divisible by (z+w) at total degree " +
                                    std::to_string(m) + "; R is not symplectic");
        }
    }
    VTable t;
    t.N = R.N;
    t.K = K;
    t.v.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        for (int l = 0; k + l <= K; ++l) {
            Mat v(n, n);
            for (int m = 0; m <= l; ++m) {
                Mat x = num(k + 1 + m, l - m);
                v += (m % 2) ? x * Rat(-1) : x;
            }
            t.v[static_cast<std::size_t>(k)].push_back(std::move(v));
        }
    }
    return t;
}

} // namespace eotr

#endif
