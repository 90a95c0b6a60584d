#ifndef EOTR_IO_HPP
#define EOTR_IO_HPP

// JSON for data, R-matrices, forms and correlator tables. Every rational is the
// string "p/q"; series terms are [exponents, "p/q"] pairs in lexicographic
// order next to explicit windows.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include <eotr/correlators.hpp>

namespace eotr
{

using json = nlohmann::json;

inline json to_json(const Rat &r) { return r.str(); }

inline Rat rat_from_json(const json &j)
{
    if (!j.is_string()) {
        throw validation_error("expected a rational string \"p/q\", got " + j.dump());
    }
    try {
        return Rat::parse(j.get<std::string>());
    } catch (const std::invalid_argument &e) {
        throw validation_error(e.what());
    }
}

inline json to_json(const std::vector<Rat> &v)
{
    json a = json::array();
    for (const auto &x : v) {
        a.push_back(to_json(x));
    }
    return a;
}

inline std::vector<Rat> vec_from_json(const json &j, const std::string &what)
{
    if (!j.is_array()) {
        throw validation_error("'" + what + "' must be an array");
    }
    std::vector<Rat> v;
    for (const auto &x : j) {
        v.push_back(rat_from_json(x));
    }
    return v;
}

inline json to_json(const Mat &m)
{
    json a = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) {
            row.push_back(to_json(m(i, k)));
        }
        a.push_back(row);
    }
    return a;
}

inline Mat mat_from_json(const json &j, const std::string &what)
{
    if (!j.is_array() || j.empty()) {
        throw validation_error("'" + what + "' must be a non-empty array of rows");
    }
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Mat m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw validation_error("'" + what + "' is not rectangular");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            m(i, k) = rat_from_json(j[i][k]);
        }
    }
    return m;
}

inline json to_json(const RMatrix &R)
{
    json a = json::array();
    for (const auto &m : R.mats) {
        a.push_back(to_json(m));
    }
    return a;
}

inline json to_json(const MultiForm &f)
{
    json vars = json::array();
    json wins = json::array();
    for (std::size_t i = 0; i < f.nvars(); ++i) {
        vars.push_back({{"name", f.vars()[i].name}, {"branch", f.vars()[i].branch}, {"deg", f.degs()[i]}});
        wins.push_back({f.windows()[i].lo, f.windows()[i].hi});
    }
    json terms = json::array();
    for (const auto &[e, c] : f.coeffs()) {
        terms.push_back({e, to_json(c)});
    }
    return {{"vars", vars}, {"windows", wins}, {"terms", terms}};
}

inline MultiForm form_from_json(const json &j)
{
    std::vector<Var> vars;
    std::vector<int> degs;
    std::vector<Window> wins;
    for (const auto &v : j.at("vars")) {
        vars.push_back(Var{v.at("name").get<std::string>(), v.at("branch").get<int>()});
        degs.push_back(v.at("deg").get<int>());
    }
    for (const auto &w : j.at("windows")) {
        wins.push_back(Window{w.at(0).get<int>(), w.at(1).get<int>()});
    }
    MultiForm f(vars, degs, wins);
    for (const auto &t : j.at("terms")) {
        f.add_term(t.at(0).get<Exponents>(), rat_from_json(t.at(1)));
    }
    return f;
}

// Everything a run needs, resolved from a config file.
struct RunConfig
{
    CanonicalData data;
    int L = 0;
    std::optional<RMatrix> R;
    std::optional<std::uint64_t> seed;
    int coeff_bound = 3;
    int g_max_complexity = 4;
    int window = 0;
};

inline json to_json(const CanonicalData &d)
{
    json j = {{"N", d.N}, {"u", to_json(d.u)}, {"eta", to_json(d.eta)}, {"psi", to_json(d.psi)},
              {"unit", to_json(d.unit)}};
    if (d.theta) {
        j["theta"] = to_json(*d.theta);
    }
    return j;
}

inline json to_json(const RunConfig &c)
{
    json j = to_json(c.data);
    j["L"] = c.L;
    if (c.R) {
        j["R"] = to_json(*c.R);
    }
    if (c.seed) {
        j["seed"] = *c.seed;
    }
    j["coeff_bound"] = c.coeff_bound;
    j["g_max_complexity"] = c.g_max_complexity;
    j["window"] = c.window;
    return j;
}

inline RunConfig config_from_json(const json &j)
{
    static const std::set<std::string> known{"N",    "u", "eta", "psi",         "unit",             "theta",
                                             "R",    "L", "seed", "coeff_bound", "g_max_complexity", "window"};
    if (!j.is_object()) {
        throw validation_error("config must be a JSON object");
    }
    for (const auto &[k, v] : j.items()) {
        if (!known.count(k)) {
            throw validation_error("unknown config key '" + k + "'");
        }
    }
    for (const char *k : {"N", "u", "eta", "psi", "unit"}) {
        if (!j.contains(k)) {
            throw validation_error(std::string("config is missing '") + k + "'");
        }
    }
    RunConfig c;
    c.data.N = j.at("N").get<int>();
    c.data.u = vec_from_json(j.at("u"), "u");
    c.data.eta = mat_from_json(j.at("eta"), "eta");
    c.data.psi = mat_from_json(j.at("psi"), "psi");
    c.data.unit = vec_from_json(j.at("unit"), "unit");
    if (j.contains("theta")) {
        c.data.theta = vec_from_json(j.at("theta"), "theta");
    }
    if (j.contains("R")) {
        RMatrix R;
        R.N = c.data.N;
        for (const auto &m : j.at("R")) {
            R.mats.push_back(mat_from_json(m, "R"));
            if (R.mats.back().rows() != static_cast<std::size_t>(R.N) ||
                R.mats.back().cols() != static_cast<std::size_t>(R.N)) {
                throw validation_error("R coefficients must be N x N");
            }
        }
        if (R.mats.empty()) {
            throw validation_error("'R' needs at least R_0");
        }
        R.L = static_cast<int>(R.mats.size()) - 1;
        c.R = std::move(R);
    }
    c.L = j.value("L", c.R ? c.R->L : 0);
    if (c.R && c.R->L != c.L) {
        throw validation_error("'L' = " + std::to_string(c.L) + " but 'R' has order " + std::to_string(c.R->L));
    }
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.coeff_bound = j.value("coeff_bound", c.coeff_bound);
    c.g_max_complexity = j.value("g_max_complexity", c.g_max_complexity);
    c.window = j.value("window", c.window);
    if (c.L < 0 || c.coeff_bound < 1 || c.g_max_complexity < 1) {
        throw validation_error("'L' must be >= 0, 'coeff_bound' and 'g_max_complexity' >= 1");
    }
    return c;
}

inline RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open config '" + path + "'");
    }
    try {
        return config_from_json(json::parse(in));
    } catch (const json::exception &e) {
        throw validation_error("config '" + path + "': " + e.what());
    }
}

// Explicit R, else a seeded random symplectic R, else the flatness recursion.
inline RMatrix resolve_r(const RunConfig &c)
{
    if (c.R) {
        return *c.R;
    }
    if (c.seed) {
        return random_symplectic_r(c.data.N, c.L, *c.seed, c.coeff_bound);
    }
    return complete_r(c.data, c.L);
}

inline json to_json(const Diagnostics &d)
{
    json items = json::array();
    for (const auto &i : d.items) {
        items.push_back({{"check", i.check}, {"ok", i.ok}, {"detail", i.detail}});
    }
    return {{"ok", d.ok()}, {"items", items}};
}

inline json omega_slice_to_json(OmegaEngine &engine, int g, int n)
{
    json entries = json::array();
    for (const auto &b : detail::tuples(n, 1, engine.context().N())) {
        if (!std::is_sorted(b.begin(), b.end())) {
            continue;
        }
        entries.push_back({{"branches", b}, {"form", to_json(engine.omega(OmegaKey{g, b}))}});
    }
    return {{"g", g}, {"n", n}, {"entries", entries}};
}

inline std::map<OmegaKey, MultiForm> omega_slice_from_json(const json &j)
{
    std::map<OmegaKey, MultiForm> out;
    const int g = j.at("g").get<int>();
    for (const auto &e : j.at("entries")) {
        out.emplace(OmegaKey{g, e.at("branches").get<std::vector<int>>()}, form_from_json(e.at("form")));
    }
    return out;
}

inline json to_json(const CorrelatorTable &t)
{
    json blocks = json::array();
    for (const auto &[gn, prov] : t.blocks()) {
        blocks.push_back({{"g", gn.first}, {"n", gn.second}, {"provenance", prov}});
    }
    json values = json::array();
    for (const auto &[k, v] : t.values()) {
        json ins = json::array();
        for (const auto &[kk, a] : k.insertions) {
            ins.push_back({kk, a});
        }
        values.push_back({{"g", k.g}, {"insertions", ins}, {"value", to_json(v)}});
    }
    return {{"blocks", blocks}, {"correlators", values}};
}

inline CorrelatorTable correlators_from_json(const json &j)
{
    CorrelatorTable t;
    for (const auto &b : j.at("blocks")) {
        t.add_block(b.at("g").get<int>(), b.at("n").get<int>(), b.at("provenance").get<std::string>());
    }
    for (const auto &c : j.at("correlators")) {
        std::vector<Insertion> ins;
        for (const auto &p : c.at("insertions")) {
            ins.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        }
        t.insert(CorrelatorKey::make(c.at("g").get<int>(), ins), rat_from_json(c.at("value")));
    }
    return t;
}

inline std::string dump(const json &j) { return j.dump(2) + "\n"; }

} // namespace eotr

#endif
