#pragma once

#include <string>
#include <vector>

namespace lvgrid {

/// Calendar lookups for a simulation year at 15-minute cadence.
///
/// Step t runs from midnight Jan 1; day/month/weekday are precomputed per day.
/// Summer is April 1 through August 31.
class YearCalendar {
public:
    explicit YearCalendar(int year);

    int year() const { return year_; }
    int days() const { return static_cast<int>(day_month_.size()); }
    int steps() const { return days() * 96; }

    int day_of_step(int t) const { return t / 96; }
    int month_of_step(int t) const { return day_month_[t / 96]; }       // 0..11
    int month_of_day(int d) const { return day_month_[d]; }
    bool is_weekday_step(int t) const { return day_weekday_[t / 96] < 5; } // Mon..Fri
    int minute_of_day(int t) const { return (t % 96) * 15; }
    int hour_of_step(int t) const { return (t % 96) / 4; }

    /// April 1 .. August 31.
    bool in_summer(int t) const {
        int m = month_of_step(t);
        return m >= 3 && m <= 7;
    }

    int first_day_of_month(int m) const { return month_first_day_[m]; }
    int days_in_month(int m) const {
        return (m == 11 ? days() : month_first_day_[m + 1]) - month_first_day_[m];
    }

    /// ISO-8601 local timestamp of step t, e.g. "2025-05-10T10:15".
    std::string timestamp(int t) const;

    /// Parses "YYYY-MM-DD[T ]HH:MM[:SS]" back to a step index; -1 if outside the year.
    int step_of_timestamp(const std::string& ts) const;

private:
    int year_;
    std::vector<int> day_month_;    // per day: month 0..11
    std::vector<int> day_weekday_;  // per day: 0=Mon .. 6=Sun
    std::vector<int> day_ofmonth_;  // per day: 1..31
    int month_first_day_[12];
};

} // namespace lvgrid
