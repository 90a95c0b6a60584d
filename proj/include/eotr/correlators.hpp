#ifndef EOTR_CORRELATORS_HPP
#define EOTR_CORRELATORS_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <eotr/recursion.hpp>

namespace eotr
{

// Witten-Kontsevich intersection numbers <tau_k1 ... tau_kn>_g by string,
// dilaton and DVV. Self-contained on purpose: nothing here goes through the
// series code.
class DvvOracle
{
public:
    mpq_class operator()(int g, std::vector<int> ks)
    {
        const int n = static_cast<int>(ks.size());
        if (g < 0 || n < 1 || 2 * g - 2 + n <= 0) {
            return 0;
        }
        int sum = 0;
        for (int k : ks) {
            if (k < 0) {
                return 0;
            }
            sum += k;
        }
        if (sum != 3 * g - 3 + n) {
            return 0;
        }
        std::sort(ks.begin(), ks.end());
        const auto key = std::make_pair(g, ks);
        if (auto it = m_memo.find(key); it != m_memo.end()) {
            return it->second;
        }
        const mpq_class v = evaluate(g, ks);
        m_memo.emplace(key, v);
        return v;
    }

private:
    static mpz_class dfact(int m)
    {
        // m!! for odd m >= -1
        mpz_class r = 1;
        for (int i = m; i > 1; i -= 2) {
            r *= i;
        }
        return r;
    }

    mpq_class evaluate(int g, const std::vector<int> &ks)
    {
        const int n = static_cast<int>(ks.size());
        if (g == 0 && n == 3) {
            return 1;
        }
        if (g == 1 && n == 1) {
            return mpq_class(1, 24);
        }
        // ks is sorted, so zeros and ones come first.
        if (ks[0] == 0) {
            const std::vector<int> rest(ks.begin() + 1, ks.end());
            mpq_class s = 0;
            for (std::size_t j = 0; j < rest.size(); ++j) {
                auto r = rest;
                --r[j];
                s += (*this)(g, r);
            }
            return s;
        }
        if (ks[0] == 1) {
            const std::vector<int> rest(ks.begin() + 1, ks.end());
            return mpq_class(2 * g - 2 + n - 1) * (*this)(g, rest);
        }
        const int k = ks.back() - 1;
        const std::vector<int> S(ks.begin(), ks.end() - 1);
        mpq_class s = 0;
        for (std::size_t j = 0; j < S.size(); ++j) {
            auto r = S;
            r[j] = k + S[j];
            s += mpq_class(dfact(2 * k + 2 * S[j] + 1), dfact(2 * S[j] - 1)) * (*this)(g, r);
        }
        for (int a = 0; a <= k - 1; ++a) {
            const int b = k - 1 - a;
            const mpq_class w = mpq_class(dfact(2 * a + 1) * dfact(2 * b + 1)) / 2;
            auto r = S;
            r.push_back(a);
            r.push_back(b);
            s += w * (*this)(g - 1, r);
            const std::size_t m = S.size();
            for (int g1 = 0; g1 <= g; ++g1) {
                for (unsigned mask = 0; mask < (1u << m); ++mask) {
                    std::vector<int> I{a}, J{b};
                    for (std::size_t i = 0; i < m; ++i) {
                        ((mask >> i) & 1u ? I : J).push_back(S[i]);
                    }
                    s += w * (*this)(g1, I) * (*this)(g - g1, J);
                }
            }
        }
        s /= dfact(2 * k + 3);
        s.canonicalize();
        return s;
    }

    std::map<std::pair<int, std::vector<int>>, mpq_class> m_memo;
};

inline Rat dvv_intersection(int g, const std::vector<int> &ks)
{
    thread_local DvvOracle oracle;
    return Rat(oracle(g, ks));
}

// An insertion v_a psi^k, a in 1..N.
using Insertion = std::pair<int, int>;

struct CorrelatorKey
{
    int g = 0;
    std::vector<Insertion> insertions;

    int n() const { return static_cast<int>(insertions.size()); }
    int psi_degree() const
    {
        int s = 0;
        for (const auto &[k, a] : insertions) {
            s += k;
        }
        return s;
    }
    static CorrelatorKey make(int g, std::vector<Insertion> ins)
    {
        std::sort(ins.begin(), ins.end());
        return CorrelatorKey{g, std::move(ins)};
    }
    friend auto operator<=>(const CorrelatorKey &, const CorrelatorKey &) = default;
};

inline bool is_tame(int g, int n, int psi_degree) { return psi_degree <= 3 * g - 3 + n; }

inline std::string to_string(const CorrelatorKey &k)
{
    std::ostringstream os;
    os << "<";
    for (std::size_t i = 0; i < k.insertions.size(); ++i) {
        os << (i ? " " : "") << "tau_" << k.insertions[i].first << "(v" << k.insertions[i].second << ")";
    }
    os << ">_" << k.g;
    return os.str();
}

class CorrelatorTable
{
public:
    bool has_block(int g, int n) const { return m_blocks.count({g, n}) > 0; }
    const std::map<std::pair<int, int>, std::string> &blocks() const { return m_blocks; }
    const std::map<CorrelatorKey, Rat> &values() const { return m_values; }

    // Value of a correlator; zero outside tameness. The block must be present.
    Rat value(int g, std::vector<Insertion> ins) const
    {
        const auto key = CorrelatorKey::make(g, std::move(ins));
        if (!has_block(g, key.n())) {
            throw std::out_of_range("correlator block (" + std::to_string(g) + "," + std::to_string(key.n()) +
                                    ") has not been extracted");
        }
        if (!is_tame(g, key.n(), key.psi_degree())) {
            return Rat(0);
        }
        auto it = m_values.find(key);
        return it == m_values.end() ? Rat(0) : it->second;
    }

    // Idempotent: inserting an existing key with a different value throws.
    void insert(const CorrelatorKey &k, const Rat &v)
    {
        if (!is_tame(k.g, k.n(), k.psi_degree())) {
            if (!v.is_zero()) {
                throw consistency_error("nonzero value " + v.str() + " for non-tame " + to_string(k));
            }
            return;
        }
        auto [it, fresh] = m_values.emplace(k, v);
        if (!fresh && it->second != v) {
            throw consistency_error(to_string(k) + " extracted as both " + it->second.str() + " and " + v.str());
        }
    }
    void add_block(int g, int n, std::string provenance) { m_blocks[{g, n}] = std::move(provenance); }

private:
    std::map<CorrelatorKey, Rat> m_values;
    std::map<std::pair<int, int>, std::string> m_blocks;
};

// F_{j,k,a}(s) ds: the coefficient (-1)^k (I_j^(k+1), v^a) of v_a psi^k in the
// insertion phi_+^{beta_j}(s; psi), as a one-form in s. Exact on
// [-2k-2, 2L-2k-1].
inline MultiForm insertion_form(const FormContext &ctx, int j, int k, int a, const Var &s)
{
    const VectorSeries I = period_vector(ctx, j, k + 1, s);
    const MultiForm &c = I[static_cast<std::size_t>(a - 1)];
    const Window w = c.windows()[0];
    MultiForm f({s}, {1}, {Window{w.lo + 1, w.hi + 1}});
    for (const auto &[e, v] : c.coeffs()) {
        f.add_term({e[0] + 1}, Rat(sign_pow(k)) * v);
    }
    return f;
}

namespace detail
{
// Sum of forms over the same variables (same order) whose floors may differ:
// the result takes the lowest floor and the lowest certified top per variable.
inline MultiForm sum_forms(const std::vector<MultiForm> &terms, const MultiForm &shape)
{
    std::vector<Window> w = shape.windows();
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (terms[t].vars() != shape.vars() || terms[t].degs() != shape.degs()) {
            throw std::invalid_argument("sum_forms: variable or degree mismatch");
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            const Window &tw = terms[t].windows()[i];
            w[i] = t == 0 ? tw : Window{std::min(w[i].lo, tw.lo), std::min(w[i].hi, tw.hi)};
        }
    }
    MultiForm out(shape.vars(), shape.degs(), w);
    for (const auto &t : terms) {
        for (const auto &[e, c] : t.coeffs()) {
            out.add_term_clipped(e, c);
        }
    }
    return out;
}

inline std::vector<std::vector<int>> tuples(int n, int lo, int hi)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(n), lo);
    if (n == 0) {
        return {{}};
    }
    if (hi < lo) {
        return out;
    }
    while (true) {
        out.push_back(cur);
        int i = n - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == hi) {
            cur[static_cast<std::size_t>(i)] = lo;
            --i;
        }
        if (i < 0) {
            return out;
        }
        ++cur[static_cast<std::size_t>(i)];
    }
}
} // namespace detail

// Solves omega_{g,n} = sum prod_m F_{j_m,k_m,a_m}(x_m) <v_a1 psi^k1 ...>_g for
// the correlators, by decreasing total psi-degree, then checks that the
// expansion reproduces every certified coefficient of every branch tuple.
inline void extract_correlators(OmegaEngine &engine, CorrelatorTable &table, int g, int n)
{
    if (!is_stable(g, n)) {
        throw std::invalid_argument("extract_correlators: (g,n) must be stable");
    }
    const FormContext &ctx = engine.context();
    const int N = ctx.N();
    const int L = ctx.L();
    const int kmax = 3 * g - 3 + n;
    const int deepest = -2 * kmax - 2;

    // F tables: (j, k, a) -> exponent -> coefficient.
    std::map<std::tuple<int, int, int>, std::map<int, Rat>> F;
    for (int j = 1; j <= N; ++j) {
        for (int k = 0; k <= kmax; ++k) {
            for (int a = 1; a <= N; ++a) {
                auto &m = F[{j, k, a}];
                const MultiForm f = insertion_form(ctx, j, k, a, Var{"s", j});
                for (const auto &[e, c] : f.coeffs()) {
                    m[e[0]] = c;
                }
            }
        }
    }
    const Mat psi_inv = ctx.data().psi.transpose() * ctx.data().eta;

    std::map<std::vector<int>, MultiForm> omegas;
    int top = 2 * L - 2 * kmax - 1;
    for (const auto &b : detail::tuples(n, 1, N)) {
        std::vector<Var> vars;
        for (int m = 0; m < n; ++m) {
            vars.push_back(Var{"x" + std::to_string(m + 1), b[static_cast<std::size_t>(m)]});
        }
        MultiForm w = engine.get(g, vars);
        for (const auto &win : w.windows()) {
            if (win.lo > deepest) {
                throw window_error("extract_correlators: omega window floor " + std::to_string(win.lo) +
                                   " does not reach the deepest pole " + std::to_string(deepest));
            }
            top = std::min(top, win.hi);
        }
        omegas.emplace(b, std::move(w));
    }
    if (top < -2) {
        throw window_error("extract_correlators: certified window ends at " + std::to_string(top),
                           2 * L - 2 * kmax - 1 < -2 ? std::optional<int>(kmax) : std::nullopt);
    }

    // Ordered correlators: (k tuple, a tuple) -> value.
    std::map<std::pair<std::vector<int>, std::vector<int>>, Rat> C;
    auto predicted = [&](const std::vector<int> &b, const std::vector<int> &exps) {
        Rat tot(0);
        for (const auto &[ka, c] : C) {
            Rat p = c;
            for (int m = 0; m < n && !p.is_zero(); ++m) {
                const auto &fm = F.at({b[static_cast<std::size_t>(m)], ka.first[static_cast<std::size_t>(m)],
                                       ka.second[static_cast<std::size_t>(m)]});
                auto it = fm.find(exps[static_cast<std::size_t>(m)]);
                p = it == fm.end() ? Rat(0) : p * it->second;
            }
            tot += p;
        }
        return tot;
    };

    auto ktuples = detail::tuples(n, 0, kmax);
    std::erase_if(ktuples, [&](const auto &kt) { return !is_tame(g, n, std::accumulate(kt.begin(), kt.end(), 0)); });
    std::stable_sort(ktuples.begin(), ktuples.end(), [](const auto &x, const auto &y) {
        return std::accumulate(x.begin(), x.end(), 0) > std::accumulate(y.begin(), y.end(), 0);
    });
    const auto atuples = detail::tuples(n, 1, N);
    for (const auto &kt : ktuples) {
        std::vector<int> exps;
        Rat weight(1);
        for (int k : kt) {
            exps.push_back(-2 * k - 2);
            weight *= Rat(-2) * Rat(mpz_class(odd_double_factorial(k + 1)));
        }
        std::map<std::vector<int>, Rat> resid;
        for (const auto &[b, w] : omegas) {
            resid[b] = w.coeff(exps) - predicted(b, exps);
        }
        for (const auto &at : atuples) {
            Rat v(0);
            for (const auto &[b, r] : resid) {
                Rat p = r;
                for (int m = 0; m < n && !p.is_zero(); ++m) {
                    p *= psi_inv(static_cast<std::size_t>(b[static_cast<std::size_t>(m)] - 1),
                                 static_cast<std::size_t>(at[static_cast<std::size_t>(m)] - 1));
                }
                v += p;
            }
            v /= weight;
            if (!v.is_zero()) {
                C[{kt, at}] = v;
            }
        }
    }

    // Residual over the whole certified window of every branch tuple.
    for (const auto &[b, w] : omegas) {
        std::vector<Window> cw;
        for (const auto &win : w.windows()) {
            cw.push_back(Window{win.lo, top});
        }
        MultiForm pred(w.vars(), w.degs(), cw);
        for (const auto &[ka, c] : C) {
            std::vector<std::pair<Exponents, Rat>> acc{{Exponents{}, c}};
            for (int m = 0; m < n; ++m) {
                const auto &fm = F.at({b[static_cast<std::size_t>(m)], ka.first[static_cast<std::size_t>(m)],
                                       ka.second[static_cast<std::size_t>(m)]});
                std::vector<std::pair<Exponents, Rat>> next;
                for (const auto &[e, x] : acc) {
                    for (const auto &[fe, fc] : fm) {
                        if (fe <= top) {
                            Exponents e2 = e;
                            e2.push_back(fe);
                            next.emplace_back(std::move(e2), x * fc);
                        }
                    }
                }
                acc = std::move(next);
            }
            for (const auto &[e, x] : acc) {
                pred.add_term_clipped(e, x);
            }
        }
        if (auto bad = first_mismatch(w.restricted(cw), pred)) {
            std::ostringstream os;
            os << "extract_correlators: residual of omega_{" << g << "," << n << "} does not vanish at exponent (";
            for (std::size_t i = 0; i < bad->size(); ++i) {
                os << (i ? "," : "") << (*bad)[i];
            }
            os << ")";
            throw consistency_error(os.str());
        }
    }

    std::ostringstream prov;
    prov << "omega_{" << g << "," << n << "} over " << omegas.size() << " branch tuples, window [" << deepest << ","
         << top << "], L=" << L;
    table.add_block(g, n, prov.str());
    for (const auto &[ka, c] : C) {
        std::vector<Insertion> ins;
        for (int m = 0; m < n; ++m) {
            ins.emplace_back(ka.first[static_cast<std::size_t>(m)], ka.second[static_cast<std::size_t>(m)]);
        }
        table.insert(CorrelatorKey::make(g, ins), c);
    }
    // Symmetry: each ordered tuple must agree with its canonical key, including
    // those solved as zero.
    for (const auto &kt : ktuples) {
        for (const auto &at : atuples) {
            std::vector<Insertion> ins;
            for (int m = 0; m < n; ++m) {
                ins.emplace_back(kt[static_cast<std::size_t>(m)], at[static_cast<std::size_t>(m)]);
            }
            auto it = C.find({kt, at});
            const Rat v = it == C.end() ? Rat(0) : it->second;
            if (table.value(g, ins) != v) {
                throw consistency_error("extract_correlators: " + to_string(CorrelatorKey::make(g, ins)) +
                                        " is not symmetric in its insertions");
            }
        }
    }
}

// Omega(t, phi_-^{beta_j}(s; z)) for t = v_a z^k, as a one-form in s:
// -(I_j^(-k)(s), v_a) s ds. This is the unstable (0,2) correlator with one
// insertion of phi_+.
inline MultiForm unstable_pairing(const FormContext &ctx, int j, int k, int a, const Var &s)
{
    const VectorSeries I = period_vector(ctx, j, -k, s);
    const Window w = period_window(-k, ctx.L());
    MultiForm f({s}, {1}, {Window{w.lo + 1, w.hi + 1}});
    const Mat &eta = ctx.data().eta;
    for (int c = 1; c <= ctx.N(); ++c) {
        const Rat &e = eta(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(c - 1));
        if (e.is_zero()) {
            continue;
        }
        for (const auto &[x, v] : I[static_cast<std::size_t>(c - 1)].coeffs()) {
            f.add_term({x[0] + 1}, -e * v);
        }
    }
    return f;
}

// t(psi) = 1/2 sum_j Res Omega(t(z), f_-^{beta_j}(lambda; z)) phi^{beta_j}(lambda; psi)
// for t = v_a z^k, compared coefficient by coefficient in psi^l, l in [0, k + L].
inline Diagnostics insertion_reconstruct_check(const FormContext &ctx, int k, int a)
{
    if (k < 0 || a < 1 || a > ctx.N()) {
        throw std::invalid_argument("insertion_reconstruct_check: need k >= 0 and a in 1..N");
    }
    const int N = ctx.N();
    const Mat &eta = ctx.data().eta;
    Diagnostics d;
    for (int l = 0; l <= k + ctx.L(); ++l) {
        std::vector<Rat> got(static_cast<std::size_t>(N), Rat(0));
        for (int j = 1; j <= N; ++j) {
            const Var s{"s", j};
            // Omega(v_a z^k, f_-) = -(I^(-k-1), v_a), a function of s.
            const VectorSeries lo = period_vector(ctx, j, -k - 1, s);
            MultiForm pairing({s}, {0}, {period_window(-k - 1, ctx.L())});
            for (int c = 0; c < N; ++c) {
                const Rat &e = eta(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(c));
                if (!e.is_zero()) {
                    for (const auto &[x, v] : lo[static_cast<std::size_t>(c)].coeffs()) {
                        pairing.add_term(x, -e * v);
                    }
                }
            }
            for (int b = 1; b <= N; ++b) {
                // (-1)^l I^(l+1)_b s ds
                const MultiForm phi = insertion_form(ctx, j, l, b, s);
                const MultiForm res = branch_residue(mf_mul(pairing, phi), "s");
                got[static_cast<std::size_t>(b - 1)] += res.coeff({}) / Rat(2);
            }
        }
        for (int b = 1; b <= N; ++b) {
            const Rat want(l == k && b == a ? 1 : 0);
            const Rat &have = got[static_cast<std::size_t>(b - 1)];
            d.add("psi^" + std::to_string(l) + " component " + std::to_string(b), have == want,
                  have == want ? "" : "got " + have.str() + ", expected " + want.str());
        }
    }
    return d;
}

namespace detail
{
// Stable correlator with one phi_+^{beta_j}(s) insertion:
// sum_{k,a} F_{j,k,a}(s) <v_a psi^k, rest>_g.
inline std::optional<MultiForm> phi_correlator(const FormContext &ctx, const CorrelatorTable &table, int g,
                                               const std::vector<Insertion> &rest, const Var &s)
{
    const int n = static_cast<int>(rest.size()) + 1;
    int used = 0;
    for (const auto &[k, a] : rest) {
        used += k;
    }
    std::vector<MultiForm> terms;
    for (int k = 0; is_tame(g, n, used + k); ++k) {
        for (int a = 1; a <= ctx.N(); ++a) {
            auto ins = rest;
            ins.emplace_back(k, a);
            const Rat c = table.value(g, ins);
            if (!c.is_zero()) {
                terms.push_back(mf_scale(insertion_form(ctx, s.branch, k, a, s), c));
            }
        }
    }
    if (terms.empty()) {
        return std::nullopt;
    }
    return sum_forms(terms, MultiForm({s}, {1}, {Window{}}));
}

// Same with two phi_+ insertions at the same point; a quadratic differential.
inline std::optional<MultiForm> phi_phi_correlator(const FormContext &ctx, const CorrelatorTable &table, int g,
                                                   const std::vector<Insertion> &rest, const Var &s)
{
    const int n = static_cast<int>(rest.size()) + 2;
    int used = 0;
    for (const auto &[k, a] : rest) {
        used += k;
    }
    std::vector<MultiForm> terms;
    for (int k1 = 0; is_tame(g, n, used + k1); ++k1) {
        for (int k2 = 0; is_tame(g, n, used + k1 + k2); ++k2) {
            for (int a1 = 1; a1 <= ctx.N(); ++a1) {
                for (int a2 = 1; a2 <= ctx.N(); ++a2) {
                    auto ins = rest;
                    ins.emplace_back(k1, a1);
                    ins.emplace_back(k2, a2);
                    const Rat c = table.value(g, ins);
                    if (!c.is_zero()) {
                        terms.push_back(mf_scale(mf_mul(insertion_form(ctx, s.branch, k1, a1, s),
                                                        insertion_form(ctx, s.branch, k2, a2, s)),
                                                 c));
                    }
                }
            }
        }
    }
    if (terms.empty()) {
        return std::nullopt;
    }
    return sum_forms(terms, MultiForm({s}, {2}, {Window{}}));
}

// <phi_+(s), ins>_g allowing the unstable conventions: (0,1) vanishes and
// (0,2) is the pairing Omega(t, phi_-).
inline std::optional<MultiForm> split_factor(const FormContext &ctx, const CorrelatorTable &table, int g,
                                             const std::vector<Insertion> &ins, const Var &s)
{
    if (g == 0 && ins.empty()) {
        return std::nullopt;
    }
    if (g == 0 && ins.size() == 1) {
        return unstable_pairing(ctx, s.branch, ins[0].first, ins[0].second, s);
    }
    return phi_correlator(ctx, table, g, ins, s);
}
} // namespace detail

// Stable blocks the Virasoro check for <phi_+, n insertions>_g reads.
inline std::set<std::pair<int, int>> virasoro_blocks(int g, int n)
{
    std::set<std::pair<int, int>> out{{g, n + 1}};
    if (g >= 1 && is_stable(g - 1, n + 2)) {
        out.insert({g - 1, n + 2});
    }
    for (int g1 = 0; g1 <= g; ++g1) {
        for (int n1 = 0; n1 <= n; ++n1) {
            if (is_stable(g1, n1 + 1) && !(g1 == g && n1 == n)) {
                out.insert({g1, n1 + 1});
            }
        }
    }
    return out;
}

// Checks <phi_+^{beta_i}(r; psi), ins>_g against
// 1/4 sum_j Res [phi_+^{beta_i}(r), f_-^{beta_j}(s)] / ((I_j^(-1)(s), 1) ds)
//   x (loop + ordered splittings),
// with the kernel reassembled here from period vectors and its sign taken
// from the context.
inline Diagnostics virasoro_check(const FormContext &ctx, const CorrelatorTable &table, int g,
                                  const std::vector<Insertion> &ins, int i_ext)
{
    ctx.check_branch(i_ext);
    const int n = static_cast<int>(ins.size());
    if (!is_stable(g, n + 1)) {
        throw std::invalid_argument("virasoro_check: <phi_+, ...> must be stable");
    }
    const int N = ctx.N();
    const int L = ctx.L();
    const Var r{"r", i_ext};
    std::ostringstream label;
    label << "(g,n)=(" << g << "," << n + 1 << ") " << to_string(CorrelatorKey{g, ins}) << " branch " << i_ext;
    Diagnostics d;

    auto lhs = detail::phi_correlator(ctx, table, g, ins, r);

    std::vector<MultiForm> rhs_terms;
    for (int j = 1; j <= N; ++j) {
        const Var s{"s", j};
        std::vector<MultiForm> stuff_terms;
        if (g >= 1) {
            if (g == 1 && n == 0) {
                stuff_terms.push_back(propagator_p0(ctx, s));
            } else if (auto loop = detail::phi_phi_correlator(ctx, table, g - 1, ins, s)) {
                stuff_terms.push_back(*loop);
            }
        }
        for (int g1 = 0; g1 <= g; ++g1) {
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                std::vector<Insertion> I, J;
                for (int m = 0; m < n; ++m) {
                    ((mask >> m) & 1u ? I : J).push_back(ins[static_cast<std::size_t>(m)]);
                }
                auto f1 = detail::split_factor(ctx, table, g1, I, s);
                auto f2 = detail::split_factor(ctx, table, g - g1, J, s);
                if (f1 && f2) {
                    stuff_terms.push_back(mf_mul(*f1, *f2));
                }
            }
        }
        if (stuff_terms.empty()) {
            continue;
        }
        const MultiForm stuff = detail::sum_forms(stuff_terms, MultiForm({s}, {2}, {Window{}}));
        const Window sw = stuff.windows()[0];

        // Kernel numerator sum_k (-1)^(k+1) (I_i^(k+1)(r), I_j^(-k-1)(s)) r, on
        // the s-range the residue can see.
        const int hs = -1 - sw.lo;
        if (hs > 2 * L) {
            throw window_error("virasoro_check: kernel s-window " + std::to_string(hs) + " exceeds 2L",
                               detail::ceil_half(hs));
        }
        const int hn = hs + 2;
        const int kK = (hn - 1) / 2;
        MultiForm num({r, s}, {1, 0}, {Window{-2 * kK - 2, 2 * L - 2 * kK - 1}, Window{1, hn}});
        for (int k = 0; k <= kK; ++k) {
            const VectorSeries Ir = period_vector(ctx, i_ext, k + 1, r);
            const VectorSeries Is = period_vector(ctx, j, -k - 1, s);
            for (int a = 0; a < N; ++a) {
                for (int b = 0; b < N; ++b) {
                    const Rat &e = ctx.data().eta(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                    if (e.is_zero()) {
                        continue;
                    }
                    for (const auto &[x, u] : Ir[static_cast<std::size_t>(a)].coeffs()) {
                        for (const auto &[y, v] : Is[static_cast<std::size_t>(b)].coeffs()) {
                            num.add_term_clipped({x[0] + 1, y[0]}, Rat(sign_pow(k + 1)) * e * u * v);
                        }
                    }
                }
            }
        }
        // (I_j^(-1)(s), 1) s, the denominator per ds.
        const VectorSeries Im1 = period_vector(ctx, j, -1, s);
        const Window dw = period_window(-1, L);
        MultiForm den({s}, {1}, {Window{dw.lo + 1, dw.hi + 1}});
        const auto eu = ctx.data().eta * ctx.data().unit;
        for (int a = 0; a < N; ++a) {
            for (const auto &[x, u] : Im1[static_cast<std::size_t>(a)].coeffs()) {
                den.add_term({x[0] + 1}, u * eu[static_cast<std::size_t>(a)]);
            }
        }
        if (den.coeff({2}).is_zero()) {
            throw validation_error("virasoro_check: (I^(-1), 1) has no leading term on branch " + std::to_string(j));
        }
        const MultiForm kernel = mf_scale(mf_mul(num, series_inverse(den)), Rat(ctx.kernel_sign(), 4));
        rhs_terms.push_back(residue_of_product(kernel, stuff, "s"));
    }

    if (!lhs && rhs_terms.empty()) {
        d.add(label.str(), true, "both sides vanish identically");
        return d;
    }
    const MultiForm shape({r}, {1}, {Window{}});
    const MultiForm L_side = lhs ? *lhs : MultiForm({r}, {1}, {Window{-1, kUnboundedHi}});
    const MultiForm R_side =
        rhs_terms.empty() ? MultiForm({r}, {1}, {Window{-1, kUnboundedHi}}) : detail::sum_forms(rhs_terms, shape);
    const Window common = intersect(L_side.windows()[0], R_side.windows()[0]);
    if (common.hi < 0) {
        throw window_error("virasoro_check: certified window for " + label.str() + " ends at r^" +
                           std::to_string(common.hi));
    }
    std::ostringstream detail;
    if (auto bad = first_mismatch(L_side, R_side)) {
        const int e = (*bad)[0];
        detail << "r^" << e << ": lhs " << L_side.coeff({e}).str() << ", rhs " << R_side.coeff({e}).str()
               << " (order " << e << " of (g,n)=(" << g << "," << n + 1 << "))";
        d.add(label.str(), false, detail.str());
    } else {
        detail << "agree on r^[" << std::max(L_side.windows()[0].lo, R_side.windows()[0].lo) << "," << common.hi
               << "]";
        d.add(label.str(), true, detail.str());
    }
    return d;
}

// Every tame insertion tuple (sorted) with n insertions and the given genus
// budget for <phi_+, ...>_{g,n+1}.
inline std::vector<std::vector<Insertion>> virasoro_insertions(int g, int n, int N)
{
    std::vector<std::vector<Insertion>> out;
    const int kmax = 3 * g - 3 + n + 1;
    for (const auto &kt : detail::tuples(n, 0, std::max(0, kmax))) {
        if (std::accumulate(kt.begin(), kt.end(), 0) > kmax) {
            continue;
        }
        for (const auto &at : detail::tuples(n, 1, N)) {
            std::vector<Insertion> ins;
            for (int m = 0; m < n; ++m) {
                ins.emplace_back(kt[static_cast<std::size_t>(m)], at[static_cast<std::size_t>(m)]);
            }
            if (std::is_sorted(ins.begin(), ins.end())) {
                out.push_back(ins);
            }
        }
    }
    return out;
}

// Kernel sign making the extracted <tau_0^3>_0 equal +1 for the one-branch
// datum with R = I.
inline int calibrate_kernel_sign()
{
    CanonicalData d;
    d.N = 1;
    d.u = {Rat(0)};
    d.eta = Mat{{Rat(1)}};
    d.psi = Mat{{Rat(1)}};
    d.unit = {Rat(1)};
    const FormContext ctx(d, RMatrix::identity(1, 2), +1);
    auto engine = OmegaEngine::for_targets(ctx, {{0, 3}});
    CorrelatorTable t;
    extract_correlators(engine, t, 0, 3);
    const Rat v = t.value(0, {{0, 1}, {0, 1}, {0, 1}});
    if (v == Rat(1)) {
        return +1;
    }
    if (v == Rat(-1)) {
        return -1;
    }
    throw consistency_error("calibrate_kernel_sign: <tau_0^3> = " + v.str() + " is not +-1");
}

} // namespace eotr

#endif
