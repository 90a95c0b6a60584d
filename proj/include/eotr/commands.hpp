#ifndef EOTR_COMMANDS_HPP
#define EOTR_COMMANDS_HPP

// The batch verbs behind the command line tool. Each returns the exit code and
// the exact bytes to write, so callers (and tests) can compare runs.

#include <optional>
#include <string>

#include <eotr/io.hpp>

namespace eotr
{

enum ExitCode { kOk = 0, kValidation = 1, kWindow = 2, kConsistency = 3 };

struct CommandOptions
{
    std::optional<int> g;
    std::optional<int> n;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct CommandResult
{
    int code = kOk;
    std::string out;
    std::string err;
};

namespace detail
{
inline json manifest(const std::string &verb, const RunConfig &c, const RMatrix &R, const CommandOptions &o)
{
    json m = {{"verb", verb}, {"config", to_json(c)}, {"R", to_json(R)}};
    if (o.g) {
        m["g"] = *o.g;
    }
    if (o.n) {
        m["n"] = *o.n;
    }
    return m;
}

// Stable (g,n) with 2g-2+n <= bound, by increasing complexity.
inline std::vector<std::pair<int, int>> blocks_up_to(int bound, std::optional<int> g_cap = std::nullopt)
{
    std::vector<std::pair<int, int>> out;
    for (int c = 1; c <= bound; ++c) {
        for (int g = 0; 2 * g - 2 < c; ++g) {
            const int n = c - 2 * g + 2;
            if (n >= 1 && (!g_cap || g <= *g_cap)) {
                out.emplace_back(g, n);
            }
        }
    }
    return out;
}

inline RunConfig apply_options(RunConfig c, const CommandOptions &o)
{
    if (o.seed) {
        c.seed = *o.seed;
        c.R.reset();
    }
    return c;
}
} // namespace detail

inline CommandResult cmd_validate(const RunConfig &c)
{
    CommandResult r;
    Diagnostics d = validate_canonical(c.data);
    json rep = {{"datum", to_json(d)}};
    if (d.ok()) {
        try {
            const Diagnostics s = check_symplectic(resolve_r(c));
            rep["R"] = to_json(s);
            for (const auto &i : s.items) {
                d.items.push_back(i);
            }
        } catch (const std::runtime_error &e) {
            d.add("R-matrix", false, e.what());
            rep["R"] = {{"ok", false}, {"items", json::array({{{"check", "R-matrix"}, {"ok", false}, {"detail", e.what()}}})}};
        }
    }
    rep["ok"] = d.ok();
    r.out = dump(rep);
    if (!d.ok()) {
        r.code = kValidation;
        r.err = d.first_failure()->check + ": " + d.first_failure()->detail + "\n";
    }
    return r;
}

inline CommandResult cmd_omega(const RunConfig &c, const CommandOptions &o)
{
    if (!o.g || !o.n) {
        throw std::invalid_argument("omega needs --g and --n");
    }
    const int g = *o.g, n = *o.n;
    if (!is_stable(g, n) || 2 * g - 2 + n > c.g_max_complexity) {
        throw validation_error("(g,n) = (" + std::to_string(g) + "," + std::to_string(n) +
                               ") is unstable or beyond g_max_complexity");
    }
    const RMatrix R = resolve_r(c);
    const FormContext ctx(c.data, R);
    auto engine = OmegaEngine::for_targets(ctx, {{g, n}}, c.window, o.threads);
    const json out = {{"manifest", detail::manifest("omega", c, R, o)}, {"omega", omega_slice_to_json(engine, g, n)}};
    return CommandResult{kOk, dump(out), ""};
}

inline CorrelatorTable correlator_table(const FormContext &ctx, const std::vector<std::pair<int, int>> &blocks,
                                        int threads)
{
    auto engine = OmegaEngine::for_targets(ctx, blocks, 0, threads);
    CorrelatorTable t;
    for (const auto &[g, n] : blocks) {
        extract_correlators(engine, t, g, n);
    }
    return t;
}

inline CommandResult cmd_correlators(const RunConfig &c, const CommandOptions &o)
{
    const RMatrix R = resolve_r(c);
    const FormContext ctx(c.data, R);
    const auto t = correlator_table(ctx, detail::blocks_up_to(c.g_max_complexity, o.g), o.threads);
    const json out = {{"manifest", detail::manifest("correlators", c, R, o)}, {"correlators", to_json(t)}};
    return CommandResult{kOk, dump(out), ""};
}

inline CommandResult cmd_random_r(const RunConfig &c, const CommandOptions &o)
{
    RunConfig r = c;
    if (!r.seed) {
        throw validation_error("random-r needs a seed (--seed or config 'seed')");
    }
    r.R = random_symplectic_r(r.data.N, r.L, *r.seed, r.coeff_bound);
    (void)o;
    return CommandResult{kOk, dump(to_json(r)), ""};
}

// hrp, dual routes, symmetry and parity, insertion reconstruction and the
// Virasoro identities, all on the configured datum.
inline CommandResult cmd_check(const RunConfig &c, const CommandOptions &o)
{
    CommandResult res;
    json sections = json::object();
    bool all_ok = true;
    auto record = [&](const std::string &name, const Diagnostics &d) {
        sections[name] = to_json(d);
        all_ok = all_ok && d.ok();
    };

    const CommandResult v = cmd_validate(c);
    if (v.code != kOk) {
        return v;
    }
    const RMatrix R = resolve_r(c);
    const FormContext ctx(c.data, R);
    const int N = ctx.N(), L = ctx.L();

    Diagnostics hrp;
    const int K = std::min(5, L);
    for (int k1 = -K; k1 <= K; ++k1) {
        for (int k2 = -K; k2 <= K && k1 + k2 <= L; ++k2) {
            Mat want(static_cast<std::size_t>(N), static_cast<std::size_t>(N));
            if (k1 + k2 == 0) {
                want = Mat::identity(static_cast<std::size_t>(N)) * Rat(2 * sign_pow(k1));
            }
            const Mat got = hrp_residue_matrix(ctx, k1, k2);
            std::ostringstream os;
            if (!(got == want)) {
                os << "got " << got;
            }
            hrp.add("k'=" + std::to_string(k1) + " k''=" + std::to_string(k2), got == want, os.str());
        }
    }
    record("hrp", hrp);

    Diagnostics dual;
    for (int i = 1; i <= N; ++i) {
        try {
            one_point_form(ctx, i, Var{"s", i});
            dual.add("one-point branch " + std::to_string(i), true);
        } catch (const consistency_error &e) {
            dual.add("one-point branch " + std::to_string(i), false, e.what());
        }
        for (int j = 1; j <= N; ++j) {
            const std::string name = "two-point " + std::to_string(i) + "," + std::to_string(j);
            try {
                two_point_form(ctx, Var{"r", i}, Var{"s", j}, Window{-2, L - 1}, Window{-2, L - 1});
                dual.add(name, true);
            } catch (const consistency_error &e) {
                dual.add(name, false, e.what());
            }
        }
    }
    record("dual_route", dual);

    Diagnostics irc;
    for (int k = 0; k <= std::min(3, L); ++k) {
        for (int a = 1; a <= N; ++a) {
            const Diagnostics d = insertion_reconstruct_check(ctx, k, a);
            irc.add("t = v_" + std::to_string(a) + " z^" + std::to_string(k), d.ok(),
                    d.ok() ? "" : d.first_failure()->check + " " + d.first_failure()->detail);
        }
    }
    record("insertion_reconstruct", irc);

    const auto blocks = detail::blocks_up_to(c.g_max_complexity, o.g);
    auto engine = OmegaEngine::for_targets(ctx, blocks, 0, o.threads);
    Diagnostics sym;
    for (const auto &[g, n] : blocks) {
        for (const auto &b : detail::tuples(n, 1, N)) {
            if (std::is_sorted(b.begin(), b.end())) {
                const OmegaKey k{g, b};
                const Diagnostics d = engine.symmetry_check(k);
                sym.add(to_string(k), d.ok(), d.ok() ? "" : d.first_failure()->check + " " + d.first_failure()->detail);
            }
        }
    }
    record("symmetry_parity", sym);

    CorrelatorTable t;
    for (const auto &[g, n] : blocks) {
        extract_correlators(engine, t, g, n);
    }
    Diagnostics vir;
    for (const auto &[g, n] : blocks) {
        for (const auto &ins : virasoro_insertions(g, n - 1, N)) {
            for (int i = 1; i <= N; ++i) {
                const Diagnostics d = virasoro_check(ctx, t, g, ins, i);
                for (const auto &item : d.items) {
                    vir.items.push_back(item);
                }
            }
        }
    }
    record("virasoro", vir);

    const json out = {{"manifest", detail::manifest("check", c, R, o)}, {"ok", all_ok}, {"sections", sections}};
    res.out = dump(out);
    if (!all_ok) {
        res.code = kConsistency;
        for (const auto &[name, s] : sections.items()) {
            if (!s["ok"].get<bool>()) {
                res.err += "check failed: " + name + "\n";
            }
        }
    }
    return res;
}

// Dispatch with the exit-code mapping of the command line tool.
inline CommandResult run_command(const std::string &verb, const RunConfig &config, const CommandOptions &o)
{
    try {
        const RunConfig c = detail::apply_options(config, o);
        if (verb == "validate") {
            return cmd_validate(c);
        }
        if (verb == "omega") {
            return cmd_omega(c, o);
        }
        if (verb == "correlators") {
            return cmd_correlators(c, o);
        }
        if (verb == "check") {
            return cmd_check(c, o);
        }
        if (verb == "random-r") {
            return cmd_random_r(c, o);
        }
        return CommandResult{kValidation, "", "unknown verb '" + verb + "'\n"};
    } catch (const window_error &e) {
        std::string msg = std::string("window exhausted: ") + e.what();
        if (e.required_order()) {
            msg += " (minimal L = " + std::to_string(*e.required_order()) + ")";
        }
        return CommandResult{kWindow, "", msg + "\n"};
    } catch (const validation_error &e) {
        return CommandResult{kValidation, "", std::string("validation failed: ") + e.what() + "\n"};
    } catch (const consistency_error &e) {
        return CommandResult{kConsistency, "", std::string("consistency failure: ") + e.what() + "\n"};
    } catch (const std::invalid_argument &e) {
        return CommandResult{kValidation, "", std::string("bad input: ") + e.what() + "\n"};
    }
}

} // namespace eotr

#endif
