#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kobex {

inline constexpr const char* kReportSchema = "kobex-report/1";
inline constexpr const char* kToolVersion = "0.3.0";

enum class Relation { le, lt, ge, gt, eq };
const char* relation_name(Relation r);
Relation parse_relation(const std::string& s);
bool holds(double observed, Relation r, double threshold);

struct Verdict {
    std::string name;
    double observed = 0.0;
    Relation relation = Relation::le;
    double threshold = 0.0;
    bool pass = false;
};

Verdict make_verdict(std::string name, double observed, Relation r, double threshold);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Record {
    std::string stage;
    std::string op;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, double>> values;
    std::vector<Verdict> verdicts;
    std::vector<Table> tables;
    std::string error;  // non-empty when the stage raised

    void value(const std::string& key, double v) { values.emplace_back(key, v); }
    Verdict& check(const std::string& name, double observed, Relation r, double threshold);
};

struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
    std::vector<Record> records;
    double wall_seconds = 0.0;  // not serialized, so reports stay byte-identical

    bool pass() const;
    int verdict_count() const;
    int failed_count() const;
    // header, one line per record, summary
    std::string to_jsonl() const;
    // stage,op,kind,name,value,relation,threshold,pass
    std::string summary_csv() const;
};

Report parse_report(const std::string& jsonl);
// Re-evaluates every verdict from its recorded numbers; returns the number of mismatches.
int recheck_verdicts(const Report& r);

std::string table_csv(const Table& t);

}  // namespace kobex
