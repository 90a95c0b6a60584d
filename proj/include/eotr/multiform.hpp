#ifndef EOTR_MULTIFORM_HPP
#define EOTR_MULTIFORM_HPP

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <eotr/errors.hpp>
#include <eotr/rational.hpp>

namespace eotr
{

// A local expansion variable. The branch index tags the critical value u_j the
// variable is anchored at, through lambda = u_j + s^2 / 2.
struct Var {
    std::string name;
    int branch = 0;

    friend bool operator==(const Var &a, const Var &b) { return a.name == b.name && a.branch == b.branch; }
};

// Closed exponent interval [lo, hi] on which coefficients are exact.
//
// Outside the window coefficients are unknown. lo is also a floor: no term of
// the underlying exact series, known or not, has an exponent below lo in that
// variable. Products and diagonal restrictions rely on this. Every constructor
// in this library picks lo at or below the true valuation in that variable.
struct Window {
    int lo = 0;
    int hi = -1;

    bool empty() const { return hi < lo; }
    bool contains(int e) const { return lo <= e && e <= hi; }
    bool covers(const Window &o) const { return o.empty() || (lo <= o.lo && o.hi <= hi); }

    friend bool operator==(const Window &, const Window &) = default;
};

// Upper bound used for expansions that are exact polynomials.
inline constexpr int kUnboundedHi = 1 << 20;

inline Window intersect(const Window &a, const Window &b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

using Exponents = std::vector<int>;

// Sparse multivariate Laurent expansion with per-variable form degree.
//
// The degree of a variable counts the factors ds carried by the expansion:
// -1 for kernel denominators, 0 for functions, 1 for one-forms, 2 for the
// symmetric product ds.ds. Coefficients are stored in lexicographic order of
// the exponent tuples; zero coefficients are never stored.
class MultiForm
{
public:
    MultiForm() = default;

    MultiForm(std::vector<Var> vars, std::vector<int> degs, std::vector<Window> windows)
        : m_vars(std::move(vars)), m_degs(std::move(degs)), m_windows(std::move(windows))
    {
        if (m_vars.size() != m_degs.size() || m_vars.size() != m_windows.size()) {
            throw std::invalid_argument("MultiForm: vars, degs and windows must have the same length");
        }
        for (std::size_t i = 0; i < m_vars.size(); ++i) {
            for (std::size_t j = i + 1; j < m_vars.size(); ++j) {
                if (m_vars[i].name == m_vars[j].name) {
                    throw std::invalid_argument("MultiForm: duplicate variable '" + m_vars[i].name + "'");
                }
            }
            if (m_degs[i] < -1 || m_degs[i] > 2) {
                throw std::invalid_argument("MultiForm: form degree out of range");
            }
        }
    }

    static MultiForm constant(const Rat &c)
    {
        MultiForm r;
        r.add_term({}, c);
        return r;
    }

    std::size_t nvars() const { return m_vars.size(); }
    const std::vector<Var> &vars() const { return m_vars; }
    const std::vector<int> &degs() const { return m_degs; }
    const std::vector<Window> &windows() const { return m_windows; }
    const std::map<Exponents, Rat> &coeffs() const { return m_coeffs; }
    std::size_t size() const { return m_coeffs.size(); }
    bool is_zero() const { return m_coeffs.empty(); }

    std::optional<std::size_t> find(const std::string &name) const
    {
        for (std::size_t i = 0; i < m_vars.size(); ++i) {
            if (m_vars[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }
    std::size_t index_of(const std::string &name) const
    {
        auto i = find(name);
        if (!i) {
            throw std::invalid_argument("MultiForm: no variable named '" + name + "'");
        }
        return *i;
    }
    const Window &window(const std::string &name) const { return m_windows[index_of(name)]; }
    int deg(const std::string &name) const { return m_degs[index_of(name)]; }

    bool in_window(const Exponents &e) const
    {
        assert(e.size() == m_vars.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!m_windows[i].contains(e[i])) {
                return false;
            }
        }
        return true;
    }

    // Accumulates c at exponent e. Throws if e is outside the window.
    void add_term(const Exponents &e, const Rat &c)
    {
        if (e.size() != m_vars.size()) {
            throw std::invalid_argument("MultiForm::add_term: exponent arity mismatch");
        }
        if (!in_window(e)) {
            throw window_error("MultiForm::add_term: exponent outside window");
        }
        if (c.is_zero()) {
            return;
        }
        auto [it, inserted] = m_coeffs.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) {
                m_coeffs.erase(it);
            }
        }
    }

    // Same as add_term but silently drops exponents outside the window.
    void add_term_clipped(const Exponents &e, const Rat &c)
    {
        if (in_window(e)) {
            add_term(e, c);
        }
    }

    // Coefficient at e; throws if e is not certified by the window.
    Rat coeff(const Exponents &e) const
    {
        if (e.size() != m_vars.size() || !in_window(e)) {
            throw window_error("MultiForm::coeff: exponent outside window");
        }
        auto it = m_coeffs.find(e);
        return it == m_coeffs.end() ? Rat(0) : it->second;
    }

    // Smallest stored exponent in variable i, if any term is stored.
    std::optional<int> min_exponent(std::size_t i) const
    {
        std::optional<int> r;
        for (const auto &[e, c] : m_coeffs) {
            if (!r || e[i] < *r) {
                r = e[i];
            }
        }
        return r;
    }
    std::optional<int> max_exponent(std::size_t i) const
    {
        std::optional<int> r;
        for (const auto &[e, c] : m_coeffs) {
            if (!r || e[i] > *r) {
                r = e[i];
            }
        }
        return r;
    }

    // Shrinks the windows to the requested ones. Every requested window must
    // lie inside the current one (or be empty).
    MultiForm restricted(const std::vector<Window> &w) const
    {
        if (w.size() != m_windows.size()) {
            throw std::invalid_argument("MultiForm::restricted: arity mismatch");
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!m_windows[i].covers(w[i])) {
                std::ostringstream os;
                os << "requested window [" << w[i].lo << "," << w[i].hi << "] for '" << m_vars[i].name
                   << "' exceeds certified window [" << m_windows[i].lo << "," << m_windows[i].hi << "]";
                throw window_error(os.str());
            }
        }
        MultiForm r(m_vars, m_degs, w);
        for (const auto &[e, c] : m_coeffs) {
            if (r.in_window(e)) {
                r.m_coeffs.emplace(e, c);
            }
        }
        return r;
    }

    // Renames variables (names and branches); unmapped variables are kept.
    MultiForm renamed(const std::map<std::string, Var> &m) const
    {
        auto vars = m_vars;
        for (auto &v : vars) {
            if (auto it = m.find(v.name); it != m.end()) {
                v = it->second;
            }
        }
        MultiForm r(std::move(vars), m_degs, m_windows);
        r.m_coeffs = m_coeffs;
        return r;
    }

    // Reorders the variables to the given name order (a permutation of vars()).
    MultiForm permuted(const std::vector<std::string> &order) const
    {
        if (order.size() != m_vars.size()) {
            throw std::invalid_argument("MultiForm::permuted: arity mismatch");
        }
        std::vector<std::size_t> src(order.size());
        std::vector<Var> vars;
        std::vector<int> degs;
        std::vector<Window> wins;
        for (std::size_t i = 0; i < order.size(); ++i) {
            src[i] = index_of(order[i]);
            vars.push_back(m_vars[src[i]]);
            degs.push_back(m_degs[src[i]]);
            wins.push_back(m_windows[src[i]]);
        }
        MultiForm r(std::move(vars), std::move(degs), std::move(wins));
        for (const auto &[e, c] : m_coeffs) {
            Exponents f(e.size());
            for (std::size_t i = 0; i < e.size(); ++i) {
                f[i] = e[src[i]];
            }
            r.m_coeffs.emplace(std::move(f), c);
        }
        return r;
    }

    friend bool operator==(const MultiForm &a, const MultiForm &b)
    {
        return a.m_vars == b.m_vars && a.m_degs == b.m_degs && a.m_windows == b.m_windows && a.m_coeffs == b.m_coeffs;
    }

    friend std::ostream &operator<<(std::ostream &os, const MultiForm &f)
    {
        os << "MultiForm(";
        for (std::size_t i = 0; i < f.m_vars.size(); ++i) {
            os << (i ? ", " : "") << f.m_vars[i].name << "@" << f.m_vars[i].branch << " deg " << f.m_degs[i] << " ["
               << f.m_windows[i].lo << "," << f.m_windows[i].hi << "]";
        }
        os << ") {";
        bool first = true;
        for (const auto &[e, c] : f.m_coeffs) {
            os << (first ? " " : ", ") << c << " *";
            for (std::size_t i = 0; i < e.size(); ++i) {
                os << " " << f.m_vars[i].name << "^" << e[i];
            }
            first = false;
        }
        return os << " }";
    }

private:
    friend MultiForm mf_add(const MultiForm &, const MultiForm &);
    friend MultiForm mf_mul(const MultiForm &, const MultiForm &);

    std::vector<Var> m_vars;
    std::vector<int> m_degs;
    std::vector<Window> m_windows;
    std::map<Exponents, Rat> m_coeffs;
};

// Coefficientwise sum on the intersection of the windows. The operands must
// carry the same variables and degrees; the variable order of b may differ.
inline MultiForm mf_add(const MultiForm &a, const MultiForm &b)
{
    if (a.nvars() != b.nvars()) {
        throw std::invalid_argument("mf_add: mismatched variables");
    }
    std::vector<std::string> order;
    for (const auto &v : a.vars()) {
        auto j = b.find(v.name);
        if (!j || !(b.vars()[*j] == v)) {
            throw std::invalid_argument("mf_add: mismatched variables");
        }
        order.push_back(v.name);
    }
    const MultiForm bb = b.permuted(order);
    if (a.degs() != bb.degs()) {
        throw std::invalid_argument("mf_add: mismatched form degrees");
    }
    std::vector<Window> w(a.nvars());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = intersect(a.windows()[i], bb.windows()[i]);
    }
    // Terms above the common window are dropped (unknown). A surviving term
    // below the common floor would make the floor a lie, so it is an error.
    std::map<Exponents, Rat> acc = a.coeffs();
    for (const auto &[e, c] : bb.coeffs()) {
        auto [it, inserted] = acc.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
        }
    }
    MultiForm r(a.vars(), a.degs(), w);
    for (const auto &[e, c] : acc) {
        if (c.is_zero()) {
            continue;
        }
        bool below = false, above = false;
        for (std::size_t i = 0; i < e.size(); ++i) {
            below = below || e[i] < w[i].lo;
            above = above || e[i] > w[i].hi;
        }
        if (above) {
            continue;
        }
        if (below) {
            throw window_error("mf_add: sum has a term below the common window floor");
        }
        r.add_term(e, c);
    }
    return r;
}

inline MultiForm mf_scale(const MultiForm &a, const Rat &c)
{
    MultiForm r(a.vars(), a.degs(), a.windows());
    if (c.is_zero()) {
        return r;
    }
    for (const auto &[e, v] : a.coeffs()) {
        r.add_term(e, v * c);
    }
    return r;
}

inline MultiForm mf_neg(const MultiForm &a) { return mf_scale(a, Rat(-1)); }

inline MultiForm mf_sub(const MultiForm &a, const MultiForm &b) { return mf_add(a, mf_neg(b)); }

// Product of expansions over the union of their variables.
//
// Window propagation: a variable present in only one operand keeps that
// operand's window. For a shared variable with windows [la, ha], [lb, hb] the
// product is certified on [la + lb, min(ha + lb, hb + la)]. An unknown term of
// either operand lies above its window in some variable; since lo bounds every
// term from below, its contributions land above the product window in that
// variable.
inline MultiForm mf_mul(const MultiForm &a, const MultiForm &b)
{
    std::vector<Var> vars = a.vars();
    std::vector<int> degs = a.degs();
    std::vector<Window> wins = a.windows();
    std::vector<std::size_t> pos_b(b.nvars());
    for (std::size_t j = 0; j < b.nvars(); ++j) {
        const auto &v = b.vars()[j];
        if (auto i = a.find(v.name)) {
            if (!(a.vars()[*i] == v)) {
                throw std::invalid_argument("mf_mul: variable '" + v.name + "' anchored at different branches");
            }
            pos_b[j] = *i;
            const int d = a.degs()[*i] + b.degs()[j];
            if (d > 2) {
                throw std::invalid_argument("mf_mul: form degree exceeds 2 in '" + v.name + "'");
            }
            degs[*i] = d;
            const Window &wa = a.windows()[*i];
            const Window &wb = b.windows()[j];
            wins[*i] = Window{wa.lo + wb.lo, std::min(wa.hi + wb.lo, wb.hi + wa.lo)};
        } else {
            pos_b[j] = vars.size();
            vars.push_back(v);
            degs.push_back(b.degs()[j]);
            wins.push_back(b.windows()[j]);
        }
    }
    MultiForm r(std::move(vars), std::move(degs), std::move(wins));
    const std::size_t n = r.nvars();
    std::map<Exponents, Rat> acc;
    Exponents e(n);
    for (const auto &[ea, ca] : a.coeffs()) {
        for (const auto &[eb, cb] : b.coeffs()) {
            std::fill(e.begin(), e.end(), 0);
            std::copy(ea.begin(), ea.end(), e.begin());
            for (std::size_t j = 0; j < eb.size(); ++j) {
                e[pos_b[j]] += eb[j];
            }
            if (!r.in_window(e)) {
                continue;
            }
            auto [it, inserted] = acc.try_emplace(e, ca * cb);
            if (!inserted) {
                it->second += ca * cb;
            }
        }
    }
    for (auto &[k, c] : acc) {
        if (!c.is_zero()) {
            r.m_coeffs.emplace(k, std::move(c));
        }
    }
    return r;
}

// Deck transformation s -> -s of the double cover lambda = u + s^2/2 in
// variable v. The ds factors flip sign too, so the coefficient at exponent e
// picks up (-1)^(e + deg).
inline MultiForm reflect(const MultiForm &f, const std::string &v)
{
    const std::size_t i = f.index_of(v);
    MultiForm r(f.vars(), f.degs(), f.windows());
    for (const auto &[e, c] : f.coeffs()) {
        r.add_term(e, sign_pow(e[i] + f.degs()[i]) == 1 ? c : -c);
    }
    return r;
}

inline bool is_reflection_invariant(const MultiForm &f, const std::string &v)
{
    const std::size_t i = f.index_of(v);
    return std::all_of(f.coeffs().begin(), f.coeffs().end(),
                       [&](const auto &t) { return (t.first[i] + f.degs()[i]) % 2 == 0; });
}

// Residue at the branch point in the lambda plane of a one-form in v.
//
// One loop around u_j in lambda lifts to half a loop in s, so the residue is
// half the s^-1 coefficient. The integrand must be single valued in lambda,
// i.e. invariant under reflect in v.
inline MultiForm branch_residue(const MultiForm &f, const std::string &v)
{
    const std::size_t i = f.index_of(v);
    if (f.degs()[i] != 1) {
        throw std::invalid_argument("branch_residue: integrand must be a one-form in '" + v + "'");
    }
    // A floor above -1 certifies a zero residue.
    if (f.windows()[i].hi < -1) {
        throw window_error("branch_residue: window of '" + v + "' does not certify exponent -1");
    }
    for (const auto &[e, c] : f.coeffs()) {
        if ((e[i] + 1) % 2 != 0) {
            std::ostringstream os;
            os << "branch_residue: integrand not invariant under reflection in '" << v << "' (coefficient " << c
               << " at exponent " << e[i] << ")";
            throw consistency_error(os.str());
        }
    }
    std::vector<Var> vars;
    std::vector<int> degs;
    std::vector<Window> wins;
    for (std::size_t k = 0; k < f.nvars(); ++k) {
        if (k != i) {
            vars.push_back(f.vars()[k]);
            degs.push_back(f.degs()[k]);
            wins.push_back(f.windows()[k]);
        }
    }
    MultiForm r(std::move(vars), std::move(degs), std::move(wins));
    const Rat half(1, 2);
    for (const auto &[e, c] : f.coeffs()) {
        if (e[i] == -1) {
            Exponents g;
            g.reserve(e.size() - 1);
            for (std::size_t k = 0; k < e.size(); ++k) {
                if (k != i) {
                    g.push_back(e[k]);
                }
            }
            r.add_term(g, c * half);
        }
    }
    return r;
}

// Same window, moved floor and/or lowered ceiling. Lowering lo is always sound
// (lo is a floor); raising it is allowed only when no stored term falls below
// the new lo. Terms above the new hi are dropped.
inline MultiForm rewindow(const MultiForm &f, const std::vector<Window> &w)
{
    if (w.size() != f.nvars()) {
        throw std::invalid_argument("rewindow: arity mismatch");
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].hi > f.windows()[i].hi) {
            throw window_error("rewindow: ceiling for '" + f.vars()[i].name + "' above certified " +
                               std::to_string(f.windows()[i].hi));
        }
    }
    MultiForm r(f.vars(), f.degs(), w);
    for (const auto &[e, c] : f.coeffs()) {
        bool above = false;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] < w[i].lo) {
                throw window_error("rewindow: term below the new floor of '" + f.vars()[i].name + "'");
            }
            above = above || e[i] > w[i].hi;
        }
        if (!above) {
            r.add_term(e, c);
        }
    }
    return r;
}

// branch_residue(mf_mul(a, b), v) without forming the full product. v must be
// the only variable shared by a and b, and both factors must be invariant
// under reflect in v.
inline MultiForm residue_of_product(const MultiForm &a, const MultiForm &b, const std::string &v)
{
    const std::size_t ia = a.index_of(v);
    const std::size_t ib = b.index_of(v);
    if (a.degs()[ia] + b.degs()[ib] != 1) {
        throw std::invalid_argument("residue_of_product: product must be a one-form in '" + v + "'");
    }
    for (std::size_t j = 0; j < b.nvars(); ++j) {
        if (j != ib && a.find(b.vars()[j].name)) {
            throw std::invalid_argument("residue_of_product: factors share a variable besides '" + v + "'");
        }
    }
    if (!is_reflection_invariant(a, v) || !is_reflection_invariant(b, v)) {
        throw consistency_error("residue_of_product: factor not single-valued in '" + v + "'");
    }
    const Window &wa = a.windows()[ia];
    const Window &wb = b.windows()[ib];
    const Window w{wa.lo + wb.lo, std::min(wa.hi + wb.lo, wb.hi + wa.lo)};
    if (w.hi < -1) {
        throw window_error("residue_of_product: product window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) +
                           "] in '" + v + "' does not certify the residue");
    }
    std::vector<Var> vars;
    std::vector<int> degs;
    std::vector<Window> wins;
    for (const MultiForm *f : {&a, &b}) {
        const std::size_t skip = (f == &a) ? ia : ib;
        for (std::size_t k = 0; k < f->nvars(); ++k) {
            if (k != skip) {
                vars.push_back(f->vars()[k]);
                degs.push_back(f->degs()[k]);
                wins.push_back(f->windows()[k]);
            }
        }
    }
    MultiForm r(std::move(vars), std::move(degs), std::move(wins));

    std::map<int, std::vector<std::pair<const Exponents *, const Rat *>>> by_exp;
    for (const auto &[e, c] : b.coeffs()) {
        by_exp[e[ib]].emplace_back(&e, &c);
    }
    std::map<Exponents, Rat> acc;
    Exponents out;
    for (const auto &[ea, ca] : a.coeffs()) {
        auto it = by_exp.find(-1 - ea[ia]);
        if (it == by_exp.end()) {
            continue;
        }
        for (const auto &[eb, cb] : it->second) {
            out.clear();
            for (std::size_t k = 0; k < ea.size(); ++k) {
                if (k != ia) {
                    out.push_back(ea[k]);
                }
            }
            for (std::size_t k = 0; k < eb->size(); ++k) {
                if (k != ib) {
                    out.push_back((*eb)[k]);
                }
            }
            if (!r.in_window(out)) {
                continue;
            }
            auto [pos, inserted] = acc.try_emplace(out, ca * *cb);
            if (!inserted) {
                pos->second += ca * *cb;
            }
        }
    }
    const Rat half(1, 2);
    for (const auto &[e, c] : acc) {
        if (!c.is_zero()) {
            r.add_term(e, c * half);
        }
    }
    return r;
}

// Restriction to the diagonal: both a and b are set equal to the new variable
// `to`, which takes the position of a. Degrees add. The window rule is the one
// of mf_mul, the diagonal being a convolution of the two exponent directions.
inline MultiForm merge_diagonal(const MultiForm &f, const std::string &a, const std::string &b, const Var &to)
{
    const std::size_t ia = f.index_of(a);
    const std::size_t ib = f.index_of(b);
    if (ia == ib) {
        throw std::invalid_argument("merge_diagonal: variables must differ");
    }
    const int d = f.degs()[ia] + f.degs()[ib];
    if (d > 2) {
        throw std::invalid_argument("merge_diagonal: form degree exceeds 2");
    }
    const Window &wa = f.windows()[ia];
    const Window &wb = f.windows()[ib];
    std::vector<Var> vars;
    std::vector<int> degs;
    std::vector<Window> wins;
    for (std::size_t k = 0; k < f.nvars(); ++k) {
        if (k == ia) {
            vars.push_back(to);
            degs.push_back(d);
            wins.push_back(Window{wa.lo + wb.lo, std::min(wa.hi + wb.lo, wb.hi + wa.lo)});
        } else if (k != ib) {
            vars.push_back(f.vars()[k]);
            degs.push_back(f.degs()[k]);
            wins.push_back(f.windows()[k]);
        }
    }
    MultiForm r(std::move(vars), std::move(degs), std::move(wins));
    for (const auto &[e, c] : f.coeffs()) {
        Exponents g;
        g.reserve(e.size() - 1);
        for (std::size_t k = 0; k < e.size(); ++k) {
            if (k == ia) {
                g.push_back(e[ia] + e[ib]);
            } else if (k != ib) {
                g.push_back(e[k]);
            }
        }
        r.add_term_clipped(g, c);
    }
    return r;
}

// Reciprocal of a single-variable expansion. The lowest stored coefficient is
// taken as the leading one (lo is a floor); with valuation v and window hi the
// reciprocal is certified on [-v, hi - 2v].
inline MultiForm series_inverse(const MultiForm &f)
{
    if (f.nvars() != 1) {
        throw std::invalid_argument("series_inverse: single-variable expansions only");
    }
    const auto v = f.min_exponent(0);
    if (!v) {
        throw std::domain_error("series_inverse: zero series");
    }
    const Window &w = f.windows()[0];
    const int len = w.hi - *v;
    MultiForm r(f.vars(), {-f.degs()[0]}, {Window{-*v, -*v + len}});
    const Rat lead = f.coeffs().begin()->second;
    std::vector<Rat> fc(len + 1), inv(len + 1);
    for (const auto &[e, c] : f.coeffs()) {
        fc[e[0] - *v] = c;
    }
    for (int n = 0; n <= len; ++n) {
        Rat acc(n == 0 ? 1 : 0);
        for (int m = 1; m <= n; ++m) {
            if (!fc[m].is_zero() && !inv[n - m].is_zero()) {
                acc -= fc[m] * inv[n - m];
            }
        }
        inv[n] = acc / lead;
        r.add_term({-*v + n}, inv[n]);
    }
    return r;
}

// Expansion of 1/(r - s)^m in the region |s| < |r|:
// sum_{k>=0} C(m-1+k, m-1) s^k r^(-m-k), on s in [0, s_hi] and the given
// r window. Every term with s-exponent <= s_hi is materialized, so any r window
// lower bound is certified.
inline MultiForm geometric_expand(int m, const Var &r, const Var &s, int s_hi, Window r_window)
{
    if (m < 1) {
        throw std::invalid_argument("geometric_expand: m must be positive");
    }
    MultiForm out({r, s}, {0, 0}, {r_window, Window{0, s_hi}});
    for (int k = 0; k <= s_hi; ++k) {
        out.add_term_clipped({-m - k, k}, binomial(m - 1 + k, m - 1));
    }
    return out;
}

// First exponent (on the common window) at which a and b differ, if any.
inline std::optional<Exponents> first_mismatch(const MultiForm &a, const MultiForm &b)
{
    std::vector<std::string> order;
    for (const auto &v : a.vars()) {
        order.push_back(v.name);
    }
    const MultiForm bb = b.permuted(order);
    std::vector<Window> w(a.nvars());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = intersect(a.windows()[i], bb.windows()[i]);
    }
    auto inside = [&](const Exponents &e) {
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (!w[i].contains(e[i])) {
                return false;
            }
        }
        return true;
    };
    for (const auto &[e, c] : a.coeffs()) {
        if (inside(e) && !(bb.coeff(e) == c)) {
            return e;
        }
    }
    for (const auto &[e, c] : bb.coeffs()) {
        if (inside(e) && !(a.coeff(e) == c)) {
            return e;
        }
    }
    return std::nullopt;
}

inline bool equal_on_common_window(const MultiForm &a, const MultiForm &b) { return !first_mismatch(a, b); }

// One single-variable expansion per flat-basis component, all sharing the same
// variable and window.
struct VectorSeries {
    std::vector<MultiForm> comps;

    std::size_t size() const { return comps.size(); }
    const MultiForm &operator[](std::size_t a) const { return comps[a]; }
    MultiForm &operator[](std::size_t a) { return comps[a]; }
};

} // namespace eotr

#endif
