#include "kobex/domain_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kobex/bundled.hpp"
#include "kobex/error.hpp"

namespace kobex {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    std::string t = trim(s);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    cplx v;
    try {
        v = parse_complex(t);
    } catch (const ConfigError&) {
        throw ConfigError(what + ": expected a number, got '" + t + "'");
    }
    if (v.imag() != 0.0) throw ConfigError(what + ": expected a real number, got '" + t + "'");
    return v.real();
}

bool parse_bool(const std::string& s, const std::string& what) {
    std::string t = trim(s);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(what + ": expected true/false, got '" + t + "'");
}

CPoint parse_point(const std::string& s) {
    auto parts = split(s, ',');
    if (parts.empty() || static_cast<int>(parts.size()) > kMaxDim) throw ConfigError("bad point '" + s + "'");
    CPoint z(static_cast<int>(parts.size()));
    for (std::size_t k = 0; k < parts.size(); ++k) z[static_cast<int>(k)] = parse_complex(parts[k]);
    return z;
}

bool KeyValues::has(const std::string& key) const {
    for (const auto& e : entries)
        if (e.first == key) return true;
    return false;
}

const std::string& KeyValues::get(const std::string& key) const {
    for (const auto& e : entries)
        if (e.first == key) return e.second;
    throw ConfigError(source + ": missing key '" + key + "'");
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

std::vector<std::string> KeyValues::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.first == key) out.push_back(e.second);
    return out;
}

double KeyValues::get_double(const std::string& key) const { return parse_double(get(key), source + ": " + key); }

double KeyValues::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool KeyValues::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? parse_bool(get(key), source + ": " + key) : fallback;
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
    KeyValues kv;
    kv.source = source;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key: value'");
        kv.entries.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_key_values(ss.str(), path);
}

Constraint expression_constraint(const Expr& e, int n) {
    Constraint c;
    c.label = e.text();
    c.value = [e](const CPoint& z) { return e.eval(z.data()).real(); };
    c.gradient = [e, n](const CPoint& z) -> std::optional<CPoint> {
        Expr::Jet j = e.eval_jet(z.data());
        if (!j.smooth) return std::nullopt;
        CPoint g(n);
        for (int k = 0; k < n; ++k) g[k] = cplx(j.d[2 * k].real(), j.d[2 * k + 1].real());
        return g;
    };
    return c;
}

DomainSpec parse_domain(const std::string& text, const std::string& source) {
    KeyValues kv = parse_key_values(text, source);
    DomainSpec D;
    D.name = kv.get_or("name", source);
    D.dim = static_cast<int>(kv.get_double("dimension"));
    if (D.dim < 1 || D.dim > kMaxDim) throw ConfigError(source + ": dimension out of range");
    std::vector<std::string> vars;
    if (kv.has("variables")) {
        vars = split(kv.get("variables"), ',');
        if (static_cast<int>(vars.size()) != D.dim) throw ConfigError(source + ": variables do not match dimension");
    } else {
        for (int k = 0; k < D.dim; ++k) vars.push_back("z" + std::to_string(k + 1));
    }
    for (const auto& c : kv.get_all("constraint"))
        D.constraints.push_back(expression_constraint(Expr::parse(c, vars), D.dim));
    if (D.constraints.empty()) throw ConfigError(source + ": no constraint");
    D.convex = kv.get_bool_or("convex", false);
    D.reinhardt = kv.get_bool_or("reinhardt", false);
    D.bounding_radius = kv.get_double_or("bounding_radius", std::numeric_limits<double>::infinity());
    if (!(D.bounding_radius > 0.0)) throw ConfigError(source + ": bounding_radius must be positive");
    return D;
}

DomainSpec load_domain(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open domain file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_domain(ss.str(), path);
}

DomainSpec resolve_domain(const std::string& ref) {
    for (const auto& n : bundled_domain_names())
        if (n == ref) return bundled_domain(ref);
    if (std::filesystem::exists(ref)) return load_domain(ref);
    std::string p = data_dir() + "/domains/" + ref + ".dom";
    if (std::filesystem::exists(p)) return load_domain(p);
    throw ConfigError("unresolved domain reference '" + ref + "'");
}

std::string data_dir() {
    if (const char* env = std::getenv("KOBEX_DATA_DIR")) return env;
#ifdef KOBEX_DATA_DIR
    return KOBEX_DATA_DIR;
#else
    return "data";
#endif
}

}  // namespace kobex
