#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kobex/domain.hpp"
#include "kobex/expression.hpp"

namespace kobex {

// "key: value" lines, '#' comments, repeated keys allowed.
class KeyValues {
public:
    std::string source;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;  // throws ConfigError if missing
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
};

KeyValues parse_key_values(const std::string& text, const std::string& source);
KeyValues read_key_values(const std::string& path);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
double parse_double(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);
// "0.3+0.1i, 0.2" -> point
CPoint parse_point(const std::string& s);

DomainSpec parse_domain(const std::string& text, const std::string& source = "<string>");
DomainSpec load_domain(const std::string& path);
// Bundled name, or a path to a domain file.
DomainSpec resolve_domain(const std::string& ref);

// Constraint built from an expression over the declared complex variables.
Constraint expression_constraint(const Expr& e, int n);

std::string data_dir();

}  // namespace kobex
