#include "lvgrid/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "lvgrid/common.hpp"

namespace lvgrid {

namespace csv {

static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

int Table::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv", "cannot open '" + path + "'");
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (t.header.empty()) {
            t.header = split(s);
        } else {
            t.rows.push_back(split(s));
            t.line_numbers.push_back(lineno);
        }
    }
    if (t.header.empty()) throw ParseError("csv", "'" + path + "' is empty");
    return t;
}

double to_double(const std::string& field, const std::string& where) {
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || !std::isfinite(v))
        throw ParseError("csv", where + ": not a number: '" + field + "'");
    return v;
}

} // namespace csv

std::vector<double> read_profile_csv(const std::string& path, const YearCalendar& cal,
                                     const std::string& value_column) {
    csv::Table t = csv::read(path);
    int ts_col = t.column("timestamp");
    int v_col = t.column(value_column);
    if (ts_col < 0 || v_col < 0)
        throw ParseError("csv", path + ": expected columns 'timestamp," + value_column + "'");
    if (static_cast<int>(t.rows.size()) != cal.steps())
        throw ParseError("csv", path + ": expected " + std::to_string(cal.steps()) + " rows, got " +
                                    std::to_string(t.rows.size()));
    std::vector<double> values(t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        if (static_cast<int>(row.size()) <= std::max(ts_col, v_col))
            throw ParseError("csv", where + ": too few fields");
        int step = cal.step_of_timestamp(row[ts_col]);
        if (step != static_cast<int>(i))
            throw ParseError("csv", where + ": timestamp '" + row[ts_col] +
                                        "' out of order or off the 15-min grid");
        values[i] = csv::to_double(row[v_col], where);
    }
    return values;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("io", "cannot write '" + path + "'");
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v, int decimals) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    // avoid "-0.000000"
    std::string s = buf;
    bool allzero = true;
    for (char c : s)
        if (c >= '1' && c <= '9') allzero = false;
    if (allzero && s[0] == '-') s = s.substr(1);
    return s;
}

} // namespace lvgrid
