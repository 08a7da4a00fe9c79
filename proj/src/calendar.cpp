#include "lvgrid/calendar.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "lvgrid/common.hpp"

namespace lvgrid {

YearCalendar::YearCalendar(int year) : year_(year) {
    using namespace std::chrono;
    sys_days start{std::chrono::year{year} / January / 1};
    sys_days end{std::chrono::year{year + 1} / January / 1};
    int n = static_cast<int>((end - start).count());
    day_month_.resize(n);
    day_weekday_.resize(n);
    day_ofmonth_.resize(n);
    for (int d = 0; d < n; ++d) {
        year_month_day ymd{start + std::chrono::days{d}};
        day_month_[d] = static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
        day_ofmonth_[d] = static_cast<int>(static_cast<unsigned>(ymd.day()));
        weekday wd{start + std::chrono::days{d}};
        day_weekday_[d] = static_cast<int>(wd.iso_encoding()) - 1;
        if (day_ofmonth_[d] == 1) month_first_day_[day_month_[d]] = d;
    }
}

std::string YearCalendar::timestamp(int t) const {
    int d = t / 96;
    int minute = minute_of_day(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", year_, day_month_[d] + 1,
                  day_ofmonth_[d], minute / 60, minute % 60);
    return buf;
}

int YearCalendar::step_of_timestamp(const std::string& ts) const {
    int y = 0, mo = 0, dd = 0, hh = 0, mi = 0, ss = 0;
    int n = std::sscanf(ts.c_str(), "%d-%d-%d%*[T ]%d:%d:%d", &y, &mo, &dd, &hh, &mi, &ss);
    if (n < 5) throw ParseError("calendar", "bad timestamp '" + ts + "'");
    if (y != year_ || mo < 1 || mo > 12) return -1;
    int day = month_first_day_[mo - 1] + (dd - 1);
    if (day < 0 || day >= days() || day_ofmonth_[day] != dd) return -1;
    return day * 96 + hh * 4 + mi / 15;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("stats", "percentile of empty series");
    std::sort(values.begin(), values.end());
    double rank = q / 100.0 * (static_cast<double>(values.size()) - 1.0);
    size_t lo = static_cast<size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("stats", "dot: size mismatch");
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace lvgrid
