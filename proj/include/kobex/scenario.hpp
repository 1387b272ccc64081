#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kobex/report.hpp"

namespace kobex {

struct Stage {
    std::string label;
    std::string op;
    std::map<std::string, std::string> args;
};

struct Scenario {
    std::string name;
    std::string description;
    std::uint64_t seed = 1;
    std::optional<double> tolerance;  // overrides every stage's `tol`
    std::vector<Stage> stages;
};

// name, seed, tolerance, description, and repeated "stage: op key=value ...".
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);
// Bundled name, a path, or data/scenarios/<ref>.scn.
Scenario resolve_scenario(const std::string& ref);

std::vector<std::string> bundled_scenario_names();
std::string bundled_scenario_text(const std::string& name);

struct RunOptions {
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
};

// Stages run in order; a stage that raises is recorded with its error and fails the report.
Report run_scenario(const Scenario& s, const RunOptions& opt = {});

struct StageAnchor {
    std::string label;
    std::string op;
    std::string anchor;
    std::string summary;
};
std::vector<StageAnchor> explain(const Scenario& s);

std::vector<std::string> operation_names();
bool has_operation(const std::string& op);

struct TypeOrder {
    int k = 0;
    std::vector<double> ratios;  // phi(x)/x^k at x = 1e-1, 1e-2, 1e-3
    bool pass = false;
};

struct InfiniteTypeReport {
    std::vector<TypeOrder> orders;
    bool pass = true;
    int finite_type_bound = 0;  // smallest failing k, 0 when every order passes
};

// phi(x)/x^k must be non-increasing over x = 1e-1, 1e-2, 1e-3 and below 1e-8 at 1e-3.
InfiniteTypeReport infinite_type_check(const std::function<double(double)>& phi, const std::vector<int>& orders);

}  // namespace kobex
