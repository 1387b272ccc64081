#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "kobex/bundled.hpp"
#include "kobex/domain_io.hpp"
#include "kobex/error.hpp"
#include "kobex/extension.hpp"
#include "kobex/metrics.hpp"
#include "kobex/scenario.hpp"

using namespace kobex;
using json = nlohmann::json;

namespace {

constexpr int kExitFail = 2;
constexpr int kExitConfig = 3;

json point_json(const CPoint& z) {
    json a = json::array();
    for (int k = 0; k < z.size(); ++k) a.push_back({z[k].real(), z[k].imag()});
    return a;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << text;
}

int cmd_run(const std::string& ref, std::optional<double> tol, std::optional<std::uint64_t> seed,
            const std::string& out_dir, bool csv) {
    Scenario s = resolve_scenario(ref);
    RunOptions opt{tol, seed};
    Report r = run_scenario(s, opt);
    std::string jsonl = r.to_jsonl();
    if (out_dir.empty()) {
        std::cout << jsonl;
    } else {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / (s.name + ".jsonl"), jsonl);
    }
    if (csv) {
        std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
        std::filesystem::create_directories(dir);
        write_file(dir / (s.name + ".csv"), r.summary_csv());
        for (const auto& rec : r.records)
            for (const auto& t : rec.tables) write_file(dir / (s.name + "_" + rec.stage + "_" + t.name + ".csv"), table_csv(t));
    }
    std::cerr << s.name << ": " << (r.pass() ? "PASS" : "FAIL") << " (" << r.verdict_count() - r.failed_count() << "/"
              << r.verdict_count() << " verdicts, " << r.wall_seconds << " s)\n";
    for (const auto& rec : r.records) {
        if (!rec.error.empty()) std::cerr << "  " << rec.stage << ": error: " << rec.error << "\n";
        for (const auto& v : rec.verdicts)
            if (!v.pass)
                std::cerr << "  " << rec.stage << "." << v.name << ": " << v.observed << " " << relation_name(v.relation)
                          << " " << v.threshold << " fails\n";
    }
    return r.pass() ? 0 : kExitFail;
}

int cmd_explain(const std::string& ref) {
    Scenario s = resolve_scenario(ref);
    std::cout << s.name;
    if (!s.description.empty()) std::cout << ": " << s.description;
    std::cout << "\n";
    for (const auto& a : explain(s)) std::cout << "  " << a.label << "  " << a.op << "  [" << a.anchor << "]  " << a.summary << "\n";
    return 0;
}

int cmd_distance(const std::string& dom, const std::string& z, const std::string& to) {
    DomainSpec D = resolve_domain(dom);
    CPoint p = parse_point(z);
    require_dim(p, D.dim, "point");
    if (!contains(D, p)) throw DomainError("point is not inside " + D.name);
    auto d = boundary_distance(D, p);
    json j = {{"domain", D.name}, {"z", point_json(p)}, {"delta", d.value}, {"closed_form", d.closed_form},
              {"witness", point_json(d.witness)}};
    if (!to.empty()) {
        CPoint q = parse_point(to);
        require_dim(q, D.dim, "second point");
        if (!contains(D, q)) throw DomainError("second point is not inside " + D.name);
        j["to"] = point_json(q);
        j["path_upper"] = path_distance_upper(D, p, q);
        if (D.name == "ball") j["exact"] = kob_distance_ball_exact(p, q);
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_metric(const std::string& dom, const std::string& z, const std::string& v) {
    DomainSpec D = resolve_domain(dom);
    CPoint p = parse_point(z), w = parse_point(v);
    require_dim(p, D.dim, "point");
    require_dim(w, D.dim, "vector");
    if (!contains(D, p)) throw DomainError("point is not inside " + D.name);
    json j = {{"domain", D.name}, {"z", point_json(p)}, {"v", point_json(w)}};
    j["inscribed_ball_upper"] = inscribed_ball_upper_bound(D, p, w).value;
    if (D.convex) {
        auto [lo, hi] = graham_bounds(D, p, w);
        j["graham_lower"] = lo.value;
        j["graham_upper"] = hi.value;
    }
    if (D.name == "ball") j["exact"] = kob_metric_ball_exact(p, w);
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_extend(int grid, double half, double tol) {
    GraphChart chart = make_ex21_chart();
    ChartMap m = chart_map(chart, ex21_map());
    PsiSpec psi = ex21_psi(chart);
    auto res = extend_map(m, chart_boundary_grid(chart, grid, grid, half), tol, psi);
    for (const auto& r : res) {
        json j = {{"xi", point_json(r.xi)},          {"value", point_json(r.value)},
                  {"direct", point_json(m.value(r.xi))}, {"t_prime", r.t_prime},
                  {"t_final", r.t_final},             {"tail_bound", r.tail_bound},
                  {"truncation", r.truncation},       {"quad_error", r.quad_error}};
        std::cout << j.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kobex: invariant-metric and boundary-extension toolkit"};
    app.require_subcommand(1);

    std::string ref, out_dir;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    bool csv = false;
    auto* run = app.add_subcommand("run", "run a scenario and emit a JSONL report");
    run->add_option("scenario", ref, "bundled name or scenario file")->required();
    run->add_option("--tol", tol, "override every stage tolerance");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "write the report (and CSV files) into this directory");
    run->add_flag("--csv", csv, "emit CSV summaries and tables");

    auto* list = app.add_subcommand("list", "list bundled scenarios");

    std::string explain_ref;
    auto* expl = app.add_subcommand("explain", "print the stages of a scenario");
    expl->add_option("scenario", explain_ref)->required();

    std::string dom, z, to, v;
    auto* dist = app.add_subcommand("distance", "boundary distance, and a distance upper bound with --to");
    dist->add_option("domain", dom)->required();
    dist->add_option("z", z, "point, e.g. \"0.3, 0.1i\"")->required();
    dist->add_option("--to", to, "second point");

    std::string mdom, mz, mv;
    auto* metric = app.add_subcommand("metric", "metric bounds at (z; v)");
    metric->add_option("domain", mdom)->required();
    metric->add_option("z", mz)->required();
    metric->add_option("v", mv)->required();

    int grid = 5;
    double half = 0.05, etol = 1e-6;
    auto* ext = app.add_subcommand("extend", "boundary values of (z^2, w) on the bundled chart at (1, 0)");
    ext->add_option("--grid", grid, "nodes per axis");
    ext->add_option("--half", half, "half width of the boundary grid");
    ext->add_option("--tol", etol, "psi tail tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    try {
        if (*run) return cmd_run(ref, tol, seed, out_dir, csv);
        if (*list) {
            for (const auto& n : bundled_scenario_names()) std::cout << n << "\n";
            return 0;
        }
        if (*expl) return cmd_explain(explain_ref);
        if (*dist) return cmd_distance(dom, z, to);
        if (*metric) return cmd_metric(mdom, mz, mv);
        if (*ext) return cmd_extend(grid, half, etol);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return 0;
}
