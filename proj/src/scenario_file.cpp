#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"
#include "kobex/scenario.hpp"

namespace kobex {

namespace {

// Whitespace-separated tokens; double quotes group.
std::vector<std::string> tokenize(const std::string& s, const std::string& where) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false, any = false;
    for (char c : s) {
        if (c == '"') {
            quoted = !quoted;
            any = true;
        } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
            if (any) out.push_back(cur);
            cur.clear();
            any = false;
        } else {
            cur += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError(where + ": unterminated quote");
    if (any) out.push_back(cur);
    return out;
}

Stage parse_stage(const std::string& line, const std::string& where) {
    auto tok = tokenize(line, where);
    if (tok.empty()) throw ConfigError(where + ": empty stage");
    Stage st;
    st.op = tok[0];
    if (!has_operation(st.op)) throw ConfigError(where + ": unknown operation '" + st.op + "'");
    for (std::size_t i = 1; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError(where + ": expected key=value, got '" + tok[i] + "'");
        std::string k = tok[i].substr(0, eq), v = tok[i].substr(eq + 1);
        if (k == "label") {
            st.label = v;
        } else {
            if (st.args.count(k)) throw ConfigError(where + ": repeated argument '" + k + "'");
            st.args[k] = v;
        }
    }
    return st;
}

const std::vector<std::pair<std::string, std::string>>& bundled() {
    static const std::vector<std::pair<std::string, std::string>> s = {
        {"example21",
         "name: example21\n"
         "description: (z^2, w) from {|z|^2 + |w| < 1} onto {|z| + |w| < 1}\n"
         "seed: 21\n"
         "stage: lagrange_grid n=100\n"
         "stage: omega_distance count=1000\n"
         "stage: levi_lower count=1000\n"
         "stage: psh_check witness=ex21_u domain=Ex21_Omega count=300 label=psh_u\n"
         "stage: psh_check witness=ex21_rho domain=Ex21_D count=300 label=psh_rho\n"},
        {"example22",
         "name: example22\n"
         "description: (z, w^2) at an infinite type boundary point\n"
         "seed: 22\n"
         "stage: levi_formula count=1000\n"
         "stage: psh_check witness=ex22_rho domain=Ex22_D count=300\n"
         "stage: infinite_type phi=exp(-1/x^2) orders=1-20\n"
         "stage: hopf_quotient count=400\n"},
        {"ball-sandwich",
         "name: ball-sandwich\n"
         "description: metric sandwich on the unit ball against the closed form\n"
         "seed: 5\n"
         "stage: graham_sandwich domain=ball count=100 phases=4096\n"},
        {"extension-oracle",
         "name: extension-oracle\n"
         "description: boundary values of (z^2, w) recovered by normal-line integration\n"
         "seed: 6\n"
         "stage: extension_oracle grid=20 half=0.05\n"},
        {"dini-suite",
         "name: dini-suite\n"
         "description: Dini integrals with known values and a divergent rate\n"
         "seed: 7\n"
         "stage: dini modulus=sqrt(r) eps=1 expect=2 tol=1e-6 label=sqrt\n"
         "stage: dini modulus=r eps=1 expect=1 tol=1e-9 label=linear\n"
         "stage: dini modulus=1/(1+abs(log(r))) eps=1 expect=divergent label=log1\n"
         "stage: dini modulus=1/(1+abs(log(r)))^2 eps=1 expect=1 tol=1e-3 label=log2\n"
         "stage: dini_compose modulus=sqrt(r) kappa=2 m=0.5 label=compose_sqrt\n"
         "stage: dini_compose modulus=r kappa=3 m=1 label=compose_linear\n"
         "stage: dini_compose modulus=1/(1+abs(log(r)))^2 kappa=2 m=0.5 eps=0.1 label=compose_log2\n"},
        {"embedding-suite",
         "name: embedding-suite\n"
         "description: model domains attached along the inward normal of the (z, w^2) source chart\n"
         "seed: 8\n"
         "stage: embedding xi=100 zeta=100\n"},
        {"dichotomy-demo",
         "name: dichotomy-demo\n"
         "description: distance bounds along sequences with distinct and equal image limits\n"
         "seed: 9\n"
         "stage: dichotomy demo=ball terms=20 label=distinct_limits\n"
         "stage: dichotomy demo=ex22 terms=20 label=same_limit\n"},
        {"lipschitz-sandwich",
         "name: lipschitz-sandwich\n"
         "description: delta <= Y <= C delta on the bundled charts\n"
         "seed: 10\n"
         "stage: lipschitz_sandwich chart=ex21 count=1000 label=ex21\n"
         "stage: lipschitz_sandwich chart=ex22 count=1000 label=ex22\n"
         "stage: lipschitz_sandwich chart=flat count=300 label=flat\n"
         "stage: lipschitz_sandwich chart=paraboloid count=300 label=paraboloid\n"},
    };
    return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
    KeyValues kv = parse_key_values(text, source);
    static const std::set<std::string> known = {"name", "description", "seed", "tolerance", "stage"};
    for (const auto& [k, v] : kv.entries)
        if (!known.count(k)) throw ConfigError(source + ": unknown key '" + k + "'");
    Scenario s;
    s.name = kv.get("name");
    s.description = kv.get_or("description", "");
    double seed = kv.get_double_or("seed", 1.0);
    if (seed < 0 || seed != std::floor(seed)) throw ConfigError(source + ": seed must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(seed);
    if (kv.has("tolerance")) s.tolerance = kv.get_double("tolerance");
    std::map<std::string, int> seen;
    int i = 0;
    for (const auto& line : kv.get_all("stage")) {
        Stage st = parse_stage(line, source + " stage " + std::to_string(++i));
        if (st.label.empty()) {
            int n = ++seen[st.op];
            st.label = n == 1 ? st.op : st.op + "." + std::to_string(n);
        }
        for (const auto& other : s.stages)
            if (other.label == st.label) throw ConfigError(source + ": duplicate stage label '" + st.label + "'");
        s.stages.push_back(st);
    }
    if (s.stages.empty()) throw ConfigError(source + ": scenario has no stages");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

std::vector<std::string> bundled_scenario_names() {
    std::vector<std::string> out;
    for (const auto& [n, t] : bundled()) out.push_back(n);
    return out;
}

std::string bundled_scenario_text(const std::string& name) {
    for (const auto& [n, t] : bundled())
        if (n == name) return t;
    throw ConfigError("unknown scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& ref) {
    for (const auto& [n, t] : bundled())
        if (n == ref) return parse_scenario(t, "bundled:" + n);
    namespace fs = std::filesystem;
    if (fs::is_regular_file(ref)) return load_scenario(ref);
    fs::path p = fs::path(data_dir()) / "scenarios" / (ref + ".scn");
    if (fs::is_regular_file(p)) return load_scenario(p.string());
    throw ConfigError("unknown scenario '" + ref + "'");
}

}  // namespace kobex
