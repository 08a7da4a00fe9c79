#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "lvgrid/calendar.hpp"

namespace lvgrid {

namespace csv {

/// Splits one line on commas; fields are trimmed of surrounding whitespace.
std::vector<std::string> split(const std::string& line, char sep = ',');

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;  // source line per row, for error messages
    int column(const std::string& name) const;  // -1 if absent
};

/// Reads a CSV with a header row; `#` lines and blank lines are skipped.
Table read(const std::string& path);

double to_double(const std::string& field, const std::string& where);

} // namespace csv

/// Reads a `timestamp,kw`-style profile, checking cadence and row count against the calendar.
std::vector<double> read_profile_csv(const std::string& path, const YearCalendar& cal,
                                     const std::string& value_column = "kw");

/// Writer with fixed numeric formatting so identical data produces identical bytes.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& fields);
    static std::string num(double v, int decimals = 6);

private:
    std::ofstream out_;
};

} // namespace lvgrid
