#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "kobex/error.hpp"
#include "kobex/report.hpp"
#include "kobex/scenario.hpp"

using namespace kobex;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(KOBEX_BIN) + " " + args + " >/dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmall =
    "name: small\n"
    "seed: 4\n"
    "stage: graham_sandwich domain=ball count=5 phases=512\n"
    "stage: dini modulus=r eps=1 expect=1 tol=1e-9\n";

}  // namespace

TEST_CASE("scenario parsing") {
    Scenario s = parse_scenario(
        "name: t\nseed: 12\ntolerance: 1e-4\n"
        "stage: dini modulus=\"1/(1 + abs(log(r)))^2\" eps=1\n"
        "stage: dini modulus=r\n"
        "stage: infinite_type phi=exp(-1/x) orders=1-3 label=flat\n");
    CHECK(s.seed == 12);
    REQUIRE(s.tolerance.has_value());
    CHECK(*s.tolerance == 1e-4);
    REQUIRE(s.stages.size() == 3);
    CHECK(s.stages[0].label == "dini");
    CHECK(s.stages[1].label == "dini.2");
    CHECK(s.stages[2].label == "flat");
    CHECK(s.stages[0].args.at("modulus") == "1/(1 + abs(log(r)))^2");

    CHECK_THROWS_AS(parse_scenario("name: t\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nstage: nosuchop\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nstage: dini modulus\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nstage: dini eps=1 eps=2\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nstage: dini label=a\nstage: dini label=a\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\ncolour: red\nstage: dini\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nseed: -1\nstage: dini\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("name: t\nstage: dini modulus=\"r\n"), ConfigError);
}

TEST_CASE("unknown stage arguments are rejected at run time") {
    Scenario s = parse_scenario("name: t\nstage: dini modulus=r colour=red\n");
    CHECK_THROWS_AS(run_scenario(s), ConfigError);
}

TEST_CASE("bundled scenarios parse and every stage has an anchor") {
    auto names = bundled_scenario_names();
    CHECK(names.size() == 8);
    for (const auto& n : names) {
        Scenario s = resolve_scenario(n);
        CHECK(s.name == n);
        for (const auto& a : explain(s)) {
            CHECK_FALSE(a.anchor.empty());
            CHECK_FALSE(a.summary.empty());
            CHECK(has_operation(a.op));
        }
    }
    CHECK(resolve_scenario("quick").stages.size() == 3);
    CHECK_THROWS_AS(resolve_scenario("no-such-scenario"), ConfigError);
    CHECK(operation_names().size() == 14);
}

TEST_CASE("infinite type check") {
    auto flat = infinite_type_check([](double x) { return std::exp(-1.0 / (x * x)); }, {1, 2, 5, 10, 20});
    CHECK(flat.pass);
    CHECK(flat.finite_type_bound == 0);
    // x^3/x^4 grows toward 0
    auto cubic = infinite_type_check([](double x) { return x * x * x; }, {4, 5});
    CHECK_FALSE(cubic.pass);
    CHECK(cubic.finite_type_bound == 4);
    CHECK(cubic.orders[0].ratios[2] == doctest::Approx(1e3));
    auto e1 = infinite_type_check([](double x) { return std::exp(-1.0 / std::abs(x)); }, {1, 4, 8});
    CHECK(e1.pass);
    CHECK_THROWS_AS(infinite_type_check([](double x) { return 1.0 + x; }, {1}), DomainError);
}

TEST_CASE("relations") {
    CHECK(holds(1.0, Relation::le, 1.0));
    CHECK_FALSE(holds(1.0, Relation::lt, 1.0));
    CHECK(holds(2.0, Relation::gt, 1.0));
    CHECK(holds(1.0, Relation::eq, 1.0));
    CHECK_FALSE(holds(std::nan(""), Relation::le, 1.0));
    for (auto r : {Relation::le, Relation::lt, Relation::ge, Relation::gt, Relation::eq})
        CHECK(parse_relation(relation_name(r)) == r);
    CHECK_THROWS_AS(parse_relation("~"), ConfigError);
}

TEST_CASE("report round trip and verdict recheck") {
    Report r = run_scenario(parse_scenario(kSmall));
    CHECK(r.pass());
    CHECK(r.verdict_count() > 0);
    std::string text = r.to_jsonl();
    Report back = parse_report(text);
    CHECK(back.scenario == "small");
    CHECK(back.seed == 4);
    CHECK(back.records.size() == r.records.size());
    CHECK(back.verdict_count() == r.verdict_count());
    CHECK(back.to_jsonl() == text);
    CHECK(recheck_verdicts(back) == 0);

    // a tampered verdict is caught
    Report t = back;
    t.records[0].verdicts[0].pass = !t.records[0].verdicts[0].pass;
    CHECK(recheck_verdicts(t) == 1);

    Record rec;
    rec.stage = "x";
    rec.value("inf", std::numeric_limits<double>::infinity());
    rec.check("nan_le", std::nan(""), Relation::le, 1.0);
    Report odd;
    odd.scenario = "odd";
    odd.records.push_back(rec);
    Report o2 = parse_report(odd.to_jsonl());
    CHECK(std::isinf(o2.records[0].values[0].second));
    CHECK(std::isnan(o2.records[0].verdicts[0].observed));
    CHECK_FALSE(o2.pass());
    CHECK_THROWS_AS(parse_report("{not json\n"), ConfigError);
}

TEST_CASE("fixed seed runs are byte-identical; a new seed changes the samples") {
    Scenario s = parse_scenario(kSmall);
    std::string a = run_scenario(s).to_jsonl(), b = run_scenario(s).to_jsonl();
    CHECK(a == b);
    std::string c = run_scenario(s, {std::nullopt, 99}).to_jsonl();
    CHECK(c != a);
}

TEST_CASE("tolerance precedence: run override beats the scenario value") {
    Scenario s = parse_scenario("name: t\ntolerance: 1e-30\nstage: dini modulus=sqrt(r) eps=1 expect=2.0001\n");
    CHECK_FALSE(run_scenario(s).pass());
    CHECK(run_scenario(s, {1e-3, std::nullopt}).pass());
    CHECK_FALSE(run_scenario(s, {1e-6, std::nullopt}).pass());
}

TEST_CASE("stage errors are recorded and fail the report") {
    Scenario s = parse_scenario("name: t\nstage: infinite_type phi=1+x orders=1-2\n");
    Report r = run_scenario(s);
    CHECK_FALSE(r.pass());
    CHECK_FALSE(r.records[0].error.empty());
}

TEST_CASE("csv outputs") {
    Report r = run_scenario(resolve_scenario("dichotomy-demo"));
    std::string csv = r.summary_csv();
    CHECK(csv.rfind("stage,op,kind,name,value,relation,threshold,pass\n", 0) == 0);
    const Table& t = r.records[0].tables.at(0);
    std::string tc = table_csv(t);
    CHECK(std::count(tc.begin(), tc.end(), '\n') == static_cast<long>(t.rows.size()) + 1);
}

TEST_CASE("cli exit codes and outputs") {
    CHECK(run_cli("list") == 0);
    CHECK(run_cli("explain example21") == 0);
    CHECK(run_cli("run quick") == 0);
    CHECK(run_cli("run no-such-scenario") == 3);
    CHECK(run_cli("frobnicate") == 3);
    CHECK(run_cli("run quick --tol abc") == 3);
    CHECK(run_cli("distance Ex21_D \"0.3, 0.2\"") == 0);
    CHECK(run_cli("distance Ex21_D \"0.9, 0.9\"") == 2);
    CHECK(run_cli("distance Ex21_D \"0.3\"") == 2);
    CHECK(run_cli("metric ball \"0.3, 0.1\" \"1, 0\"") == 0);
    CHECK(run_cli("extend --grid 3") == 0);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "kobex_cli_test";
    fs::remove_all(dir);
    fs::path scn = fs::temp_directory_path() / "kobex_small.scn";
    std::ofstream(scn) << kSmall;
    CHECK(run_cli("run " + scn.string() + " --out " + dir.string() + " --csv") == 0);
    CHECK(fs::exists(dir / "small.jsonl"));
    CHECK(fs::exists(dir / "small.csv"));
    Report r = parse_report(slurp(dir / "small.jsonl"));
    CHECK(r.pass());
    CHECK(recheck_verdicts(r) == 0);

    std::ofstream(scn) << "name: strict\nstage: dini modulus=sqrt(r) eps=1 expect=3 tol=1e-6\n";
    CHECK(run_cli("run " + scn.string()) == 2);
    fs::remove_all(dir);
    fs::remove(scn);
}
