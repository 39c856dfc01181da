#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "survhsic/dataset.hpp"
#include "survhsic/error.hpp"
#include "survhsic/kaplan_meier.hpp"
#include "survhsic/permutation.hpp"
#include "survhsic/scenarios.hpp"
#include "survhsic/transport.hpp"

namespace survhsic {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Reads x,z,delta records; an optional first line "x,z,delta" is skipped and
/// blank lines are ignored. Errors name the offending line.
inline CensoredDataset read_csv(std::istream& in) {
    std::vector<CensoredRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = detail::split_fields(line);
        if (line_no == 1 && f.size() == 3 && f[0] == "x" && f[1] == "z" && f[2] == "delta") continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (f.size() != 3) throw DataError(where + "expected 3 fields (x,z,delta), got " + std::to_string(f.size()));
        const auto x = parse_number(f[0]);
        const auto z = parse_number(f[1]);
        if (!x) throw DataError(where + "covariate '" + std::string(f[0]) + "' is not a number");
        if (!z) throw DataError(where + "time '" + std::string(f[1]) + "' is not a number");
        if (*z < 0.0) throw DataError(where + "observed time is negative");
        if (f[2] != "0" && f[2] != "1")
            throw DataError(where + "event indicator '" + std::string(f[2]) + "' is outside {0,1}");
        rows.push_back({*x, *z, f[2] == "1"});
    }
    if (rows.size() < 2) throw DataError("dataset needs at least 2 rows, got " + std::to_string(rows.size()));
    return CensoredDataset(std::move(rows));
}

inline CensoredDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return read_csv(in);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline void write_csv(std::ostream& out, const CensoredDataset& d) {
    out << "x,z,delta\n";
    for (const auto& r : d) out << format_double(r.x) << ',' << format_double(r.z) << ',' << (r.event ? 1 : 0) << '\n';
}

inline void save_csv(const std::string& path, const CensoredDataset& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_csv(out, d);
}

inline void write_survival_curve(std::ostream& out, const SurvivalCurve& curve) {
    out << "time,survival\n";
    for (const auto& s : curve.steps()) out << format_double(s.time) << ',' << format_double(s.survival) << '\n';
}

inline void write_synthetic(std::ostream& out, const SyntheticDataset& d) {
    out << "y,t\n";
    for (const auto& r : d.rows) out << format_double(r.y) << ',' << format_double(r.t) << '\n';
}

inline void write_trace(std::ostream& out, const TransformTrace& trace) {
    out << "z,x,y,risk_size,pool_size\n";
    for (const auto& s : trace.steps)
        out << format_double(s.z) << ',' << format_double(s.x) << ',' << format_double(s.y) << ',' << s.risk_size
            << ',' << s.pool_size << '\n';
}

/// Field order is fixed so identical reports serialize identically.
inline nlohmann::ordered_json to_json(const TestReport& r) {
    nlohmann::ordered_json j;
    j["method"] = std::string(to_string(r.method));
    j["n"] = r.n;
    j["B"] = r.replicates;
    j["statistic"] = r.statistic;
    j["rank"] = r.rank;
    j["p"] = r.p_value;
    j["rejected"] = r.rejected;
    j["alpha"] = r.alpha;
    j["seed"] = r.seed;
    j["runtime_ms"] = r.runtime_ms;
    return j;
}

}  // namespace survhsic
