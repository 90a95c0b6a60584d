#ifndef EOTR_RECURSION_HPP
#define EOTR_RECURSION_HPP

#include <algorithm>
#include <atomic>
#include <compare>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <eotr/errors.hpp>
#include <eotr/local_forms.hpp>
#include <eotr/multiform.hpp>

namespace eotr
{

// Largest pole order of omega_{g,n} in any one variable.
inline int pole_bound(int g, int n) { return 2 * (3 * g - 2 + n); }

inline bool is_stable(int g, int n) { return n >= 1 && 2 * g - 2 + n > 0; }

// Canonical table key: branches sorted ascending.
struct OmegaKey
{
    int g = 0;
    std::vector<int> branches;

    int n() const { return static_cast<int>(branches.size()); }
    int complexity() const { return 2 * g - 2 + n(); }

    static OmegaKey canonical(int g, std::vector<int> b)
    {
        std::sort(b.begin(), b.end());
        return {g, std::move(b)};
    }

    friend auto operator<=>(const OmegaKey &, const OmegaKey &) = default;
    friend bool operator==(const OmegaKey &, const OmegaKey &) = default;
};

inline std::string to_string(const OmegaKey &k)
{
    std::string s = "omega_{" + std::to_string(k.g) + "," + std::to_string(k.n()) + "}(";
    for (std::size_t i = 0; i < k.branches.size(); ++i) {
        s += (i ? "," : "") + std::to_string(k.branches[i]);
    }
    return s + ")";
}

// Canonical variable names x1..xn.
inline std::vector<Var> canonical_vars(const OmegaKey &k)
{
    std::vector<Var> v;
    for (int i = 0; i < k.n(); ++i) {
        v.push_back(Var{"x" + std::to_string(i + 1), k.branches[static_cast<std::size_t>(i)]});
    }
    return v;
}

// Window budget for a family of targets.
//
// Every stored omega_{g,n} carries the window [-P, hi(g,n)] in each variable,
// P = pole_bound(g, n). Computing omega_{g,n} needs, for the residue variable s:
// the loop entry merged on the diagonal up to s^0, which forces its hi to be at
// least its own P; each splitting factor up to the pole order of its partner; and
// a kernel certified in s up to (total pole order of the integrand) - 1. The
// plan propagates these demands from the targets down in decreasing
// complexity and reports the smallest truncation order L satisfying every
// certification inequality of the local constructors.
struct WindowPlan
{
    int top_hi = 0;
    std::map<std::pair<int, int>, int> hi;      // (g, n) -> hi of stored entries
    std::map<std::pair<int, int>, int> kernel_s; // (g, n) -> kernel s-window hi
    int required_L = 0;
    std::string binding = "none";

    int hi_of(int g, int n) const
    {
        auto it = hi.find({g, n});
        if (it == hi.end()) {
            throw std::logic_error("WindowPlan: omega_{" + std::to_string(g) + "," + std::to_string(n) +
                                   "} not planned");
        }
        return it->second;
    }
};

namespace detail
{
// Smallest L with lhs <= 2L + c.
inline int order_for(int lhs, int c) { return std::max(0, ceil_half(lhs - c)); }
} // namespace detail

inline WindowPlan plan_windows(const std::vector<std::pair<int, int>> &targets, int top_hi = 0, bool extraction = true)
{
    WindowPlan plan;
    plan.top_hi = top_hi;
    auto demand = [&](int g, int n, int h) {
        auto [it, inserted] = plan.hi.try_emplace({g, n}, h);
        if (!inserted) {
            it->second = std::max(it->second, h);
        }
    };
    auto need = [&](int L, const std::string &why) {
        if (L > plan.required_L) {
            plan.required_L = L;
            plan.binding = why;
        }
    };
    int cmax = 0;
    for (const auto &[g, n] : targets) {
        if (!is_stable(g, n)) {
            throw std::invalid_argument("plan_windows: (g,n) = (" + std::to_string(g) + "," + std::to_string(n) +
                                        ") is not stable");
        }
        demand(g, n, top_hi);
        cmax = std::max(cmax, 2 * g - 2 + n);
        if (extraction) {
            // Residual check at exponent top_hi against basis forms of index up to 3g-3+n.
            need(detail::order_for(top_hi + 2 * (3 * g - 3 + n) + 1, 0),
                 "extraction of omega_{" + std::to_string(g) + "," + std::to_string(n) + "}");
        }
    }
    for (int c = cmax; c >= 1; --c) {
        for (int g = 0; 2 * g - 1 <= c; ++g) {
            const int n = c - 2 * g + 2;
            auto it = plan.hi.find({g, n});
            if (n < 1 || it == plan.hi.end()) {
                continue;
            }
            const int H = it->second;
            const int m = n - 1;
            const std::string tag = "omega_{" + std::to_string(g) + "," + std::to_string(n) + "}";
            int hs = -1;
            if (g >= 1) {
                if (g == 1 && m == 0) {
                    hs = std::max(hs, 1);
                    need(1, "propagator for " + tag);
                } else {
                    const int Pl = pole_bound(g - 1, m + 2);
                    hs = std::max(hs, 2 * Pl - 1);
                    demand(g - 1, m + 2, std::max(H, Pl));
                }
            }
            for (int g1 = 0; g1 <= g; ++g1) {
                for (int a = 0; a <= m; ++a) {
                    const int g2 = g - g1, n1 = a + 1, n2 = m - a + 1;
                    if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) {
                        continue;
                    }
                    const bool b1 = (g1 == 0 && n1 == 2), b2 = (g2 == 0 && n2 == 2);
                    const int P1 = b1 ? 0 : pole_bound(g1, n1);
                    const int P2 = b2 ? 0 : pole_bound(g2, n2);
                    hs = std::max(hs, P1 + P2 - 1);
                    for (const auto &[is_b, gg, nn, partner] :
                         {std::tuple{b1, g1, n1, P2}, std::tuple{b2, g2, n2, P1}}) {
                        if (is_b) {
                            need(detail::order_for(partner, 1), "two-point s-window for " + tag);
                            need(detail::order_for(H + partner, -1), "two-point window for " + tag);
                        } else {
                            demand(gg, nn, std::max(H, partner));
                        }
                    }
                }
            }
            plan.kernel_s[{g, n}] = hs;
            need(detail::order_for(hs, 0), "kernel s-window for " + tag);
            need(detail::order_for(H + hs, -2), "kernel window for " + tag);
        }
    }
    return plan;
}

// Memoized omega_{g,n} table over one FormContext.
class OmegaEngine
{
public:
    OmegaEngine(const FormContext &ctx, WindowPlan plan, int threads = 1)
        : m_ctx(ctx), m_plan(std::move(plan)), m_threads(std::max(1, threads))
    {
        if (m_plan.required_L > m_ctx.L()) {
            throw window_error("window plan needs truncation order L >= " + std::to_string(m_plan.required_L) +
                                   " (binding: " + m_plan.binding + "), have " + std::to_string(m_ctx.L()),
                               m_plan.required_L);
        }
    }

    static OmegaEngine for_targets(const FormContext &ctx, const std::vector<std::pair<int, int>> &targets,
                                   int top_hi = 0, int threads = 1)
    {
        return OmegaEngine(ctx, plan_windows(targets, top_hi), threads);
    }

    const FormContext &context() const { return m_ctx; }
    const WindowPlan &plan() const { return m_plan; }
    const std::map<OmegaKey, MultiForm> &table() const { return m_table; }

    // Canonical entry, computing it and its dependencies if needed.
    const MultiForm &omega(const OmegaKey &key)
    {
        const OmegaKey k = OmegaKey::canonical(key.g, key.branches);
        if (auto it = m_table.find(k); it != m_table.end()) {
            return it->second;
        }
        std::set<OmegaKey> closure;
        collect(k, closure);
        compute_closure(closure);
        return m_table.at(k);
    }

    // omega_{g,n} in the given variables (any order, any names).
    MultiForm get(int g, const std::vector<Var> &vars)
    {
        std::vector<int> b;
        for (const auto &v : vars) {
            b.push_back(v.branch);
        }
        omega(OmegaKey{g, b});
        return lookup(g, vars);
    }

    // The recursion evaluated with vars[0] as the distinguished argument. All
    // dependencies must already be in the table.
    MultiForm compute_distinguished(int g, const std::vector<Var> &vars) const
    {
        const int n = static_cast<int>(vars.size());
        const int m = n - 1;
        const int P = pole_bound(g, n);
        const int H = m_plan.hi_of(g, n);
        const int hs = m_plan.kernel_s.at({g, n});
        const Var &x0 = vars[0];
        const std::vector<Var> rest(vars.begin() + 1, vars.end());

        std::vector<Window> target(static_cast<std::size_t>(n), Window{-P, H});
        target[0] = Window{-P - 2, H};
        MultiForm total(vars, std::vector<int>(static_cast<std::size_t>(n), 1), target);

        for (int j = 1; j <= m_ctx.N(); ++j) {
            const Var s{"s", j};
            std::vector<MultiForm> terms;
            if (g >= 1) {
                if (g == 1 && m == 0) {
                    terms.push_back(propagator_p0(m_ctx, s));
                } else {
                    std::vector<Var> lv{s, Var{"t", j}};
                    lv.insert(lv.end(), rest.begin(), rest.end());
                    terms.push_back(merge_diagonal(lookup(g - 1, lv), "s", "t", s));
                }
            }
            for (int g1 = 0; g1 <= g; ++g1) {
                for (unsigned mask = 0; mask < (1u << m); ++mask) {
                    std::vector<Var> I, J;
                    for (int i = 0; i < m; ++i) {
                        ((mask >> i) & 1u ? I : J).push_back(rest[static_cast<std::size_t>(i)]);
                    }
                    const int g2 = g - g1;
                    const int n1 = static_cast<int>(I.size()) + 1, n2 = static_cast<int>(J.size()) + 1;
                    if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) {
                        continue;
                    }
                    const int P1 = (g1 == 0 && n1 == 2) ? 0 : pole_bound(g1, n1);
                    const int P2 = (g2 == 0 && n2 == 2) ? 0 : pole_bound(g2, n2);
                    terms.push_back(mf_mul(factor(g1, s, I, P, H, P2), factor(g2, s, J, P, H, P1)));
                }
            }
            if (terms.empty()) {
                continue;
            }
            const MultiForm K = recursion_kernel(m_ctx, x0, s, Window{-P - 2, H}, Window{-1, hs});
            for (const auto &t : terms) {
                MultiForm r = residue_of_product(K, t, "s");
                std::vector<std::string> order;
                for (const auto &v : vars) {
                    order.push_back(v.name);
                }
                r = r.permuted(order);
                total = mf_add(total, rewindow(r, target));
            }
        }

        // Tameness: nothing below the pole bound in the distinguished variable.
        for (const auto &[e, c] : total.coeffs()) {
            if (e[0] < -P) {
                throw consistency_error("omega_{" + std::to_string(g) + "," + std::to_string(n) + "}: pole of order " +
                                        std::to_string(-e[0]) + " exceeds bound " + std::to_string(P));
            }
        }
        target[0] = Window{-P, H};
        return rewindow(total, target);
    }

    // Recomputes an entry with each argument in turn distinguished and compares
    // with the stored canonical entry; checks evenness.
    Diagnostics symmetry_check(const OmegaKey &key)
    {
        Diagnostics d;
        const OmegaKey k = OmegaKey::canonical(key.g, key.branches);
        const MultiForm &stored = omega(k);
        bool even = true;
        std::string bad;
        for (const auto &[e, c] : stored.coeffs()) {
            for (int x : e) {
                if (x % 2 != 0 && even) {
                    even = false;
                    bad = "odd exponent in coefficient " + c.str();
                }
            }
        }
        d.add("even exponents", even, bad);
        const auto vars = canonical_vars(k);
        for (std::size_t r = 1; r < vars.size(); ++r) {
            std::vector<Var> rot(vars.begin() + static_cast<long>(r), vars.end());
            rot.insert(rot.end(), vars.begin(), vars.begin() + static_cast<long>(r));
            std::vector<int> rb;
            for (const auto &v : rot) {
                rb.push_back(v.branch);
            }
            std::set<OmegaKey> closure;
            collect_dependencies(OmegaKey{k.g, rb}, closure);
            compute_closure(closure);
            MultiForm alt = compute_distinguished(k.g, rot);
            std::vector<std::string> order;
            for (const auto &v : vars) {
                order.push_back(v.name);
            }
            alt = alt.permuted(order);
            d.add("distinguished " + vars[r].name, true);
            check_equal(d, stored, alt);
        }
        return d;
    }

    // Test hook: overwrite a stored coefficient.
    void corrupt(const OmegaKey &key, const Exponents &e, const Rat &c)
    {
        MultiForm &f = m_table.at(OmegaKey::canonical(key.g, key.branches));
        f.add_term(e, c - f.coeff(e));
    }

private:
    static void check_equal(Diagnostics &d, const MultiForm &a, const MultiForm &b)
    {
        if (auto e = first_mismatch(a, b)) {
            std::string where;
            for (std::size_t i = 0; i < e->size(); ++i) {
                where += (i ? "," : "") + std::to_string((*e)[i]);
            }
            d.items.back().ok = false;
            d.items.back().detail = "coefficient at (" + where + "): stored " + a.coeff(*e).str() + ", recomputed " +
                                    b.coeff(*e).str();
        }
    }

    MultiForm lookup(int g, const std::vector<Var> &vars) const
    {
        std::vector<int> b;
        for (const auto &v : vars) {
            b.push_back(v.branch);
        }
        const OmegaKey k = OmegaKey::canonical(g, b);
        auto it = m_table.find(k);
        if (it == m_table.end()) {
            throw std::logic_error("OmegaEngine: " + to_string(k) + " requested before it was computed");
        }
        std::vector<std::size_t> idx(vars.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return vars[x].branch < vars[y].branch; });
        std::map<std::string, Var> ren;
        for (std::size_t c = 0; c < idx.size(); ++c) {
            ren["x" + std::to_string(c + 1)] = vars[idx[c]];
        }
        std::vector<std::string> order;
        for (const auto &v : vars) {
            order.push_back(v.name);
        }
        return it->second.renamed(ren).permuted(order);
    }

    // omega_{g', |I|+1}(s, I), or the two-point form when (g', |I|+1) = (0, 2).
    MultiForm factor(int g, const Var &s, const std::vector<Var> &I, int P_out, int H, int partner_pole) const
    {
        if (g == 0 && I.size() == 1) {
            return two_point_form(m_ctx, I[0], s, Window{-P_out, H}, Window{0, std::max(0, partner_pole)});
        }
        std::vector<Var> v{s};
        v.insert(v.end(), I.begin(), I.end());
        return lookup(g, v);
    }

    void collect(const OmegaKey &k, std::set<OmegaKey> &out) const
    {
        if (out.count(k) || m_table.count(k)) {
            return;
        }
        out.insert(k);
        collect_dependencies(k, out);
    }

    // Entries read by the recursion with k.branches[0] distinguished; k need
    // not be canonical.
    void collect_dependencies(const OmegaKey &k, std::set<OmegaKey> &out) const
    {
        const int m = k.n() - 1;
        const std::vector<int> rest(k.branches.begin() + 1, k.branches.end());
        for (int j = 1; j <= m_ctx.N(); ++j) {
            if (k.g >= 1 && !(k.g == 1 && m == 0)) {
                std::vector<int> b{j, j};
                b.insert(b.end(), rest.begin(), rest.end());
                collect(OmegaKey::canonical(k.g - 1, b), out);
            }
            for (int g1 = 0; g1 <= k.g; ++g1) {
                for (unsigned mask = 0; mask < (1u << m); ++mask) {
                    std::vector<int> I{j};
                    for (int i = 0; i < m; ++i) {
                        if ((mask >> i) & 1u) {
                            I.push_back(rest[static_cast<std::size_t>(i)]);
                        }
                    }
                    const int g2 = k.g - g1;
                    const int n1 = static_cast<int>(I.size());
                    const int n2 = m + 2 - n1;
                    if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) {
                        continue;
                    }
                    // The mirrored ordered splitting collects the other factor.
                    if (!(g1 == 0 && n1 == 2)) {
                        collect(OmegaKey::canonical(g1, I), out);
                    }
                }
            }
        }
    }

    void compute_closure(const std::set<OmegaKey> &closure)
    {
        std::map<int, std::vector<OmegaKey>> levels;
        for (const auto &d : closure) {
            if (!m_table.count(d)) {
                levels[d.complexity()].push_back(d);
            }
        }
        for (const auto &[c, keys] : levels) {
            compute_level(keys);
        }
    }

    void compute_level(const std::vector<OmegaKey> &keys)
    {
        std::vector<MultiForm> results(keys.size());
        auto work = [&](std::size_t i) { results[i] = compute_distinguished(keys[i].g, canonical_vars(keys[i])); };
        if (m_threads == 1 || keys.size() == 1) {
            for (std::size_t i = 0; i < keys.size(); ++i) {
                work(i);
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::mutex err_mutex;
            std::exception_ptr err;
            std::vector<std::thread> pool;
            const auto nt = std::min<std::size_t>(static_cast<std::size_t>(m_threads), keys.size());
            for (std::size_t t = 0; t < nt; ++t) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < keys.size(); i = next++) {
                        try {
                            work(i);
                        } catch (...) {
                            std::lock_guard<std::mutex> lock(err_mutex);
                            if (!err) {
                                err = std::current_exception();
                            }
                        }
                    }
                });
            }
            for (auto &th : pool) {
                th.join();
            }
            if (err) {
                std::rethrow_exception(err);
            }
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            m_table.emplace(keys[i], std::move(results[i]));
        }
    }

    const FormContext &m_ctx;
    WindowPlan m_plan;
    int m_threads;
    std::map<OmegaKey, MultiForm> m_table;
};

// The unstable entries of the table: omega_{0,2} for every pair of branches
// on the given windows, and the propagator P0 as the coinciding-argument value.
struct OmegaBase
{
    std::map<std::pair<int, int>, MultiForm> two_point;
    std::map<int, MultiForm> diagonal;
};

inline OmegaBase omega_base(const FormContext &ctx, Window wr, Window ws)
{
    OmegaBase b;
    for (int i = 1; i <= ctx.N(); ++i) {
        for (int j = 1; j <= ctx.N(); ++j) {
            b.two_point.emplace(std::pair{i, j}, two_point_form(ctx, Var{"x1", i}, Var{"x2", j}, wr, ws));
        }
        b.diagonal.emplace(i, propagator_p0(ctx, Var{"x1", i}));
    }
    return b;
}

} // namespace eotr

#endif
