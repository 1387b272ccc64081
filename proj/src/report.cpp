#include "kobex/report.hpp"

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "kobex/error.hpp"

namespace kobex {

using json = nlohmann::json;

namespace {

// JSON has no inf/nan; they travel as strings.
json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::le: return "<=";
        case Relation::lt: return "<";
        case Relation::ge: return ">=";
        case Relation::gt: return ">";
        case Relation::eq: return "==";
    }
    return "?";
}

Relation parse_relation(const std::string& s) {
    if (s == "<=") return Relation::le;
    if (s == "<") return Relation::lt;
    if (s == ">=") return Relation::ge;
    if (s == ">") return Relation::gt;
    if (s == "==") return Relation::eq;
    throw ConfigError("unknown relation '" + s + "'");
}

bool holds(double o, Relation r, double t) {
    switch (r) {
        case Relation::le: return o <= t;
        case Relation::lt: return o < t;
        case Relation::ge: return o >= t;
        case Relation::gt: return o > t;
        case Relation::eq: return o == t;
    }
    return false;
}

Verdict make_verdict(std::string name, double observed, Relation r, double threshold) {
    return {std::move(name), observed, r, threshold, holds(observed, r, threshold)};
}

Verdict& Record::check(const std::string& name, double observed, Relation r, double threshold) {
    verdicts.push_back(make_verdict(name, observed, r, threshold));
    return verdicts.back();
}

bool Report::pass() const {
    for (const auto& rec : records) {
        if (!rec.error.empty()) return false;
        for (const auto& v : rec.verdicts)
            if (!v.pass) return false;
    }
    return true;
}

int Report::verdict_count() const {
    int n = 0;
    for (const auto& rec : records) n += static_cast<int>(rec.verdicts.size());
    return n;
}

int Report::failed_count() const {
    int n = 0;
    for (const auto& rec : records) {
        if (!rec.error.empty()) ++n;
        for (const auto& v : rec.verdicts) n += v.pass ? 0 : 1;
    }
    return n;
}

std::string Report::to_jsonl() const {
    std::ostringstream os;
    os << json{{"type", "header"}, {"schema", kReportSchema}, {"version", version}, {"scenario", scenario},
               {"seed", seed}}
              .dump()
       << '\n';
    for (const auto& rec : records) {
        json j = {{"type", "record"}, {"stage", rec.stage}, {"op", rec.op}};
        json params = json::object();
        for (const auto& [k, v] : rec.params) params[k] = v;
        j["params"] = params;
        json values = json::array();
        for (const auto& [k, v] : rec.values) values.push_back({{"name", k}, {"value", num(v)}});
        j["values"] = values;
        json verdicts = json::array();
        for (const auto& v : rec.verdicts)
            verdicts.push_back({{"name", v.name},
                                {"observed", num(v.observed)},
                                {"relation", relation_name(v.relation)},
                                {"threshold", num(v.threshold)},
                                {"pass", v.pass}});
        j["verdicts"] = verdicts;
        json tables = json::array();
        for (const auto& t : rec.tables) {
            json rows = json::array();
            for (const auto& row : t.rows) {
                json r = json::array();
                for (double x : row) r.push_back(num(x));
                rows.push_back(r);
            }
            tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
        }
        j["tables"] = tables;
        if (!rec.error.empty()) j["error"] = rec.error;
        os << j.dump() << '\n';
    }
    os << json{{"type", "summary"}, {"verdicts", verdict_count()}, {"failed", failed_count()}, {"pass", pass()}}.dump()
       << '\n';
    return os.str();
}

std::string Report::summary_csv() const {
    std::ostringstream os;
    os << "stage,op,kind,name,value,relation,threshold,pass\n";
    for (const auto& rec : records) {
        for (const auto& [k, v] : rec.values) os << rec.stage << ',' << rec.op << ",value," << k << ',' << fmt(v) << ",,,\n";
        for (const auto& v : rec.verdicts)
            os << rec.stage << ',' << rec.op << ",verdict," << v.name << ',' << fmt(v.observed) << ','
               << relation_name(v.relation) << ',' << fmt(v.threshold) << ',' << (v.pass ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string table_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << '\n';
    }
    return os.str();
}

Report parse_report(const std::string& jsonl) {
    Report r;
    std::istringstream is(jsonl);
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("parse_report: ") + e.what());
        }
        std::string type = j.value("type", "");
        if (type == "header") {
            if (j.value("schema", "") != kReportSchema) throw ConfigError("parse_report: unsupported schema");
            r.scenario = j.value("scenario", "");
            r.seed = j.value("seed", std::uint64_t{0});
            r.version = j.value("version", "");
            header = true;
        } else if (type == "record") {
            Record rec;
            rec.stage = j.value("stage", "");
            rec.op = j.value("op", "");
            for (auto& [k, v] : j["params"].items()) rec.params.emplace_back(k, v.get<std::string>());
            for (const auto& v : j["values"]) rec.values.emplace_back(v["name"].get<std::string>(), from_num(v["value"]));
            for (const auto& v : j["verdicts"]) {
                Verdict d;
                d.name = v["name"].get<std::string>();
                d.observed = from_num(v["observed"]);
                d.relation = parse_relation(v["relation"].get<std::string>());
                d.threshold = from_num(v["threshold"]);
                d.pass = v["pass"].get<bool>();
                rec.verdicts.push_back(d);
            }
            for (const auto& t : j["tables"]) {
                Table tab;
                tab.name = t["name"].get<std::string>();
                tab.columns = t["columns"].get<std::vector<std::string>>();
                for (const auto& row : t["rows"]) {
                    std::vector<double> out;
                    for (const auto& x : row) out.push_back(from_num(x));
                    tab.rows.push_back(out);
                }
                rec.tables.push_back(tab);
            }
            rec.error = j.value("error", "");
            r.records.push_back(rec);
        }
    }
    if (!header) throw ConfigError("parse_report: missing header line");
    return r;
}

int recheck_verdicts(const Report& r) {
    int bad = 0;
    for (const auto& rec : r.records)
        for (const auto& v : rec.verdicts)
            if (holds(v.observed, v.relation, v.threshold) != v.pass) ++bad;
    return bad;
}

}  // namespace kobex
