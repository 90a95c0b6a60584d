#ifndef EOTR_LOCAL_FORMS_HPP
#define EOTR_LOCAL_FORMS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <eotr/errors.hpp>
#include <eotr/frobenius.hpp>
#include <eotr/multiform.hpp>

namespace eotr
{

// Everything the local constructors share. Branch indices are 1-based, as in
// Var::branch.
class FormContext
{
public:
    FormContext(CanonicalData data, RMatrix R, int kernel_sign = -1)
        : m_data(std::move(data)), m_R(std::move(R)), m_kernel_sign(kernel_sign)
    {
        const Diagnostics dv = validate_canonical(m_data);
        if (!dv.ok()) {
            throw validation_error("invalid datum: " + dv.first_failure()->check + " " + dv.first_failure()->detail);
        }
        if (m_R.N != m_data.N) {
            throw validation_error("R-matrix dimension does not match the datum");
        }
        const Diagnostics ds = check_symplectic(m_R);
        if (!ds.ok()) {
            throw validation_error("R-matrix: " + ds.first_failure()->check + " " + ds.first_failure()->detail);
        }
        if (kernel_sign != 1 && kernel_sign != -1) {
            throw std::invalid_argument("FormContext: kernel sign must be +1 or -1");
        }
        for (const auto &Rl : m_R.mats) {
            m_psiR.push_back(m_data.psi * Rl);
        }
    }

    int N() const { return m_data.N; }
    int L() const { return m_R.L; }
    int kernel_sign() const { return m_kernel_sign; }
    const CanonicalData &data() const { return m_data; }
    const RMatrix &R() const { return m_R; }
    // Flat components of psi R_l e_j, i.e. column j of psi R_l.
    const Mat &psiR(int l) const { return m_psiR.at(static_cast<std::size_t>(l)); }

    // (x, y) = x^T eta y on flat components.
    Rat pair(const std::vector<Rat> &x, const std::vector<Rat> &y) const
    {
        const auto ey = m_data.eta * y;
        Rat s(0);
        for (std::size_t a = 0; a < x.size(); ++a) {
            s += x[a] * ey[a];
        }
        return s;
    }
    std::vector<Rat> column(int l, int j) const
    {
        const Mat &m = psiR(l);
        std::vector<Rat> c(m.rows());
        for (std::size_t a = 0; a < c.size(); ++a) {
            c[a] = m(a, static_cast<std::size_t>(j - 1));
        }
        return c;
    }
    void check_branch(int j) const
    {
        if (j < 1 || j > N()) {
            throw std::out_of_range("branch index " + std::to_string(j) + " outside 1.." + std::to_string(N()));
        }
    }

private:
    CanonicalData m_data;
    RMatrix m_R;
    int m_kernel_sign;
    std::vector<Mat> m_psiR;
};

// Coefficient and exponent of the A1 period I^(k) pulled back to lambda = u + s^2/2.
inline std::pair<int, Rat> a1_period_term(int k)
{
    if (k >= 0) {
        return {-2 * k - 1, Rat(2 * sign_pow(k)) * Rat(odd_double_factorial(k))};
    }
    const int m = -k - 1;
    return {2 * m + 1, Rat(2) / Rat(odd_double_factorial(m + 1))};
}

inline MultiForm a1_period(int k, const Var &s, Window w)
{
    MultiForm f({s}, {0}, {w});
    const auto [e, c] = a1_period_term(k);
    f.add_term_clipped({e}, c);
    return f;
}

// Window on which the truncated period vector I^(k) is exact.
inline Window period_window(int k, int L) { return {-2 * k - 1, 2 * L - 2 * k}; }

// I^(k)_{beta_j} = sum_l (-1)^l psi R_l e_j I^(k-l)_{A1}, flat components, as series in s.
inline VectorSeries period_vector(const FormContext &ctx, int j, int k, const Var &s)
{
    ctx.check_branch(j);
    const Window w = period_window(k, ctx.L());
    VectorSeries v;
    v.comps.assign(static_cast<std::size_t>(ctx.N()), MultiForm({s}, {0}, {w}));
    for (int l = 0; l <= ctx.L(); ++l) {
        const auto [e, c] = a1_period_term(k - l);
        const auto col = ctx.column(l, j);
        for (std::size_t a = 0; a < col.size(); ++a) {
            if (!col[a].is_zero()) {
                v.comps[a].add_term({e}, Rat(sign_pow(l)) * col[a] * c);
            }
        }
    }
    return v;
}

namespace detail
{
// Exponent -> flat vector, read off a period vector.
inline std::map<int, std::vector<Rat>> period_table(const FormContext &ctx, int j, int k)
{
    const VectorSeries v = period_vector(ctx, j, k, Var{"s", j});
    std::map<int, std::vector<Rat>> t;
    for (std::size_t a = 0; a < v.size(); ++a) {
        for (const auto &[e, c] : v[a].coeffs()) {
            auto &vec = t[e[0]];
            vec.resize(v.size(), Rat(0));
            vec[a] = c;
        }
    }
    return t;
}

inline int ceil_half(int x) { return x >= 0 ? (x + 1) / 2 : -((-x) / 2); }

// sum_{k>=0} (-1)^{k+1} (I_i^(k+1)(r), I_j^(-k-shift)(s)) as monomials r^a s^b,
// restricted to b <= bmax. shift = 0 gives the two-point form numerator,
// shift = 1 the kernel numerator. Pairings go through eta on flat components.
inline std::map<std::pair<int, int>, Rat> paired_period_sum(const FormContext &ctx, int i, int j, int shift, int bmax)
{
    std::map<std::pair<int, int>, Rat> out;
    for (int k = 0;; ++k) {
        const int smin = period_window(-k - shift, ctx.L()).lo;
        if (smin > bmax) {
            break;
        }
        const auto ti = period_table(ctx, i, k + 1);
        const auto tj = period_table(ctx, j, -k - shift);
        const int sg = sign_pow(k + 1);
        for (const auto &[er, x] : ti) {
            for (const auto &[es, y] : tj) {
                if (es > bmax) {
                    continue;
                }
                const Rat p = ctx.pair(x, y);
                if (!p.is_zero()) {
                    out[{er, es}] += Rat(sg) * p;
                }
            }
        }
    }
    std::erase_if(out, [](const auto &kv) { return kv.second.is_zero(); });
    return out;
}

inline void require_order(bool ok, const std::string &what, int needed_L)
{
    if (!ok) {
        throw window_error(what + " needs truncation order L >= " + std::to_string(needed_L), needed_L);
    }
}
} // namespace detail

// P^j(lambda) dlambda = 4 (I^(-1)_{beta_j}, 1) s ds, via the period vector.
inline MultiForm one_point_form_periods(const FormContext &ctx, int j, const Var &s)
{
    const VectorSeries v = period_vector(ctx, j, -1, s);
    const Window w = period_window(-1, ctx.L());
    MultiForm f({s}, {1}, {Window{w.lo + 1, w.hi + 1}});
    const auto eunit = ctx.data().eta * ctx.data().unit;
    for (std::size_t a = 0; a < v.size(); ++a) {
        for (const auto &[e, c] : v[a].coeffs()) {
            f.add_term({e[0] + 1}, Rat(4) * c * eunit[a]);
        }
    }
    return f;
}

// Same form from the closed Taylor expansion
// 8 sum_k (-1)^k 2^(k+1/2) / (2k+1)!! (R_k e_j, 1) (lambda - u_j)^(k+1/2) dlambda,
// where (lambda - u_j)^(k+1/2) 2^(k+1/2) = s^(2k+1) and dlambda = s ds.
inline MultiForm one_point_form_taylor(const FormContext &ctx, int j, const Var &s)
{
    ctx.check_branch(j);
    const int L = ctx.L();
    MultiForm f({s}, {1}, {Window{2, 2 * L + 3}});
    for (int k = 0; k <= L; ++k) {
        const Rat pairing = ctx.pair(ctx.column(k, j), ctx.data().unit);
        f.add_term({2 * k + 2}, Rat(8 * sign_pow(k)) * pairing / Rat(odd_double_factorial(k + 1)));
    }
    return f;
}

inline MultiForm one_point_form(const FormContext &ctx, int j, const Var &s)
{
    const MultiForm a = one_point_form_periods(ctx, j, s);
    const MultiForm b = one_point_form_taylor(ctx, j, s);
    if (auto e = first_mismatch(a, b)) {
        throw consistency_error("one_point_form: routes disagree at s^" + std::to_string((*e)[0]));
    }
    return a;
}

// Two-point form B(r, s) dr ds, r at branch i and s at branch j, expanded in
// |s| < |r|. Certified on windows with hi_s <= 2L + 1 and hi_r + hi_s <= 2L - 1.
inline void check_two_point_window(const FormContext &ctx, Window wr, Window ws)
{
    const int L = ctx.L();
    detail::require_order(ws.hi <= 2 * L + 1, "two-point form s-window", detail::ceil_half(ws.hi - 1));
    detail::require_order(wr.hi + ws.hi <= 2 * L - 1, "two-point form window", detail::ceil_half(wr.hi + ws.hi + 1));
}

// Route A: rs sum_k (-1)^(k+1) (I_i^(k+1)(r), I_j^(-k)(s)).
inline MultiForm two_point_form_periods(const FormContext &ctx, const Var &r, const Var &s, Window wr, Window ws)
{
    ctx.check_branch(r.branch);
    ctx.check_branch(s.branch);
    check_two_point_window(ctx, wr, ws);
    MultiForm f({r, s}, {1, 1}, {wr, ws});
    for (const auto &[ab, c] : detail::paired_period_sum(ctx, r.branch, s.branch, 0, ws.hi - 1)) {
        f.add_term_clipped({ab.first + 1, ab.second + 1}, c);
    }
    return f;
}

// Route B: delta_ij 2[(r-s)^-2 + (r+s)^-2] plus
// sum_{k,l} 4 (V_kl)_ij r^2k s^2l / ((2k-1)!! (2l-1)!!).
inline MultiForm two_point_form_closed(const FormContext &ctx, const Var &r, const Var &s, Window wr, Window ws)
{
    ctx.check_branch(r.branch);
    ctx.check_branch(s.branch);
    check_two_point_window(ctx, wr, ws);
    MultiForm f({r, s}, {1, 1}, {wr, ws});
    if (r.branch == s.branch && ws.hi >= 0) {
        const MultiForm g = geometric_expand(2, r, s, ws.hi, wr);
        const MultiForm sing = mf_scale(mf_add(g, reflect(g, s.name)), Rat(2));
        for (const auto &[e, c] : sing.coeffs()) {
            f.add_term_clipped(e, c);
        }
    }
    const int L = ctx.L();
    const VTable V = compute_vkl(ctx.R(), L - 1);
    const auto i = static_cast<std::size_t>(r.branch - 1);
    const auto j = static_cast<std::size_t>(s.branch - 1);
    for (int k = 0; k <= L - 1; ++k) {
        for (int l = 0; k + l <= L - 1; ++l) {
            const Rat &v = V.at(k, l)(i, j);
            if (!v.is_zero()) {
                f.add_term_clipped({2 * k, 2 * l}, Rat(4) * v /
                                                       Rat(mpz_class(odd_double_factorial(k) * odd_double_factorial(l))));
            }
        }
    }
    return f;
}

inline MultiForm two_point_form(const FormContext &ctx, const Var &r, const Var &s, Window wr, Window ws)
{
    const MultiForm a = two_point_form_periods(ctx, r, s, wr, ws);
    const MultiForm b = two_point_form_closed(ctx, r, s, wr, ws);
    if (auto e = first_mismatch(a, b)) {
        throw consistency_error("two_point_form: routes disagree at r^" + std::to_string((*e)[0]) + " s^" +
                                std::to_string((*e)[1]));
    }
    return a;
}

// Laurent coefficients in eps of 2(s^2 + eps) / (eps^2 s^2) (1 + 2 eps / s^2)^(-1/2),
// the pullback of the singular part of the two-point form at mu = lambda + eps.
// Entry n holds the coefficient of eps^(n-2), a single power of s.
inline std::vector<std::pair<int, Rat>> diagonal_singular_expansion(int max_eps_power)
{
    std::vector<std::pair<int, Rat>> out;
    for (int p = -2; p <= max_eps_power; ++p) {
        // eps^-2 (2 + 2 eps s^-2) sum_m C(-1/2, m) 2^m eps^m s^-2m
        const int m0 = p + 2;
        Rat c = Rat(2) * binomial(Rat(-1, 2), m0) * Rat(mpz_class(mpz_class(1) << m0));
        if (m0 >= 1) {
            c += Rat(2) * binomial(Rat(-1, 2), m0 - 1) * Rat(mpz_class(mpz_class(1) << (m0 - 1)));
        }
        out.emplace_back(-2 * m0, c);
    }
    return out;
}

// P0 dlambda.dlambda = (eps^0 singular term + Breg(s, s)/s^2) s^2 ds.ds, with
// Breg the two-point form of the branch minus its singular part. Exact on
// [-2, 2L - 1].
inline MultiForm propagator_p0(const FormContext &ctx, const Var &s)
{
    const int j = s.branch;
    ctx.check_branch(j);
    const int L = ctx.L();
    const int top = 2 * L - 1;
    MultiForm f({s}, {2}, {Window{-2, top}});

    const auto sing = diagonal_singular_expansion(0);
    if (!(sing[0] == std::pair<int, Rat>{0, Rat(2)}) || !sing[1].second.is_zero()) {
        throw consistency_error("propagator_p0: singular part is not 2/(mu - lambda)^2");
    }
    f.add_term({sing[2].first + 2}, sing[2].second);

    // Route-A monomials of B dr ds (exponents already include the r, s factors).
    // Negative r-exponents must resum to the singular part exactly.
    const auto terms = detail::paired_period_sum(ctx, j, j, 0, top);
    for (const auto &[ab, c] : terms) {
        const int a = ab.first + 1, b = ab.second + 1;
        if (a + b > top || b > 2 * L + 1) {
            continue;
        }
        if (a < 0) {
            const int m = b / 2;
            const bool singular_shape = (b % 2 == 0) && a == -b - 2 && c == Rat(4 * (2 * m + 1));
            if (!singular_shape) {
                throw consistency_error("propagator_p0: regular part has a negative exponent r^" + std::to_string(a) +
                                        " s^" + std::to_string(b));
            }
            continue;
        }
        f.add_term({a + b}, c);
    }
    return f;
}

// Window requirement for the kernel: s in [-1, hs] and r up to hr need
// hs <= 2L and hr + hs <= 2L - 2.
inline void check_kernel_window(const FormContext &ctx, Window wr, Window ws)
{
    const int L = ctx.L();
    detail::require_order(ws.hi <= 2 * L, "kernel s-window", detail::ceil_half(ws.hi));
    detail::require_order(wr.hi + ws.hi <= 2 * L - 2, "kernel window", detail::ceil_half(wr.hi + ws.hi + 2));
}

// K(r, s) = sign (1/2) Num / (P^j dlambda), with
// Num = 2 sum_k (-1)^(k+1) (I_i^(k+1)(r), I_j^(-k-1)(s)) r dr.
// Degree +1 in r, -1 in s.
inline MultiForm recursion_kernel(const FormContext &ctx, const Var &r, const Var &s, Window wr, Window ws)
{
    ctx.check_branch(r.branch);
    ctx.check_branch(s.branch);
    check_kernel_window(ctx, wr, ws);
    const int hs_num = ws.hi + 2;
    MultiForm num({r, s}, {1, 0}, {wr, Window{1, hs_num}});
    for (const auto &[ab, c] : detail::paired_period_sum(ctx, r.branch, s.branch, 1, hs_num)) {
        num.add_term_clipped({ab.first + 1, ab.second}, Rat(2) * c);
    }

    const MultiForm P = one_point_form(ctx, s.branch, s);
    if (P.coeff({2}).is_zero()) {
        throw validation_error("recursion_kernel: (psi e_" + std::to_string(s.branch) +
                               ", 1) = 0, one-point form has no s^2 term");
    }
    const MultiForm K = mf_mul(num, series_inverse(P));
    std::vector<Window> w = K.windows();
    w[1] = ws;
    return mf_scale(K.restricted(w), Rat(ctx.kernel_sign(), 2));
}

// Sum over branches of the residue of (I^(k1), v_a)(I^(k2), v^b) dlambda.
// Should equal 2 (-1)^k1 delta_ab delta_{k1+k2,0}.
inline Mat hrp_residue_matrix(const FormContext &ctx, int k1, int k2)
{
    detail::require_order(k1 + k2 <= ctx.L(), "hrp residue", k1 + k2);
    const auto n = static_cast<std::size_t>(ctx.N());
    Mat out(n, n);
    if (k1 + k2 < 0) {
        // Every exponent of the integrand is at least -2(k1 + k2) - 1 > -1.
        return out;
    }
    for (int j = 1; j <= ctx.N(); ++j) {
        const Var s{"s", j};
        const VectorSeries x = period_vector(ctx, j, k1, s);
        const VectorSeries y = period_vector(ctx, j, k2, s);
        MultiForm sds({s}, {1}, {Window{1, kUnboundedHi}});
        sds.add_term({1}, Rat(1));
        for (std::size_t a = 0; a < n; ++a) {
            // (x, v_a) = (eta x)_a
            MultiForm xa({s}, {0}, {period_window(k1, ctx.L())});
            for (std::size_t c = 0; c < n; ++c) {
                if (!ctx.data().eta(a, c).is_zero()) {
                    xa = mf_add(xa, mf_scale(x[c], ctx.data().eta(a, c)));
                }
            }
            for (std::size_t b = 0; b < n; ++b) {
                const MultiForm integrand = mf_mul(mf_mul(xa, y[b]), sds);
                out(a, b) += branch_residue(integrand, "s").coeff({});
            }
        }
    }
    return out;
}

} // namespace eotr

#endif
