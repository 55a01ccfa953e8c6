#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace fewsim {

struct YearMonth {
    int year = 2022;
    int month = 1;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    /// Months since year 0, month 1. Only differences are meaningful.
    long serial() const { return static_cast<long>(year) * 12 + (month - 1); }
    static YearMonth from_serial(long serial);

    YearMonth plus_months(long n) const { return from_serial(serial() + n); }

    /// "YYYY-MM"
    std::string to_string() const;
    static YearMonth parse(std::string_view text);
};

int days_in_month(int year, int month);
double hours_in_month(int year, int month);
inline double hours_in_month(YearMonth ym) { return hours_in_month(ym.year, ym.month); }

/// Inclusive month range. The bundled dataset uses 2022-01..2050-12.
struct Horizon {
    YearMonth start{2022, 1};
    YearMonth end{2050, 12};

    bool operator==(const Horizon&) const = default;

    std::size_t months() const { return static_cast<std::size_t>(end.serial() - start.serial() + 1); }
    int first_year() const { return start.year; }
    int last_year() const { return end.year; }
    bool contains(YearMonth ym) const { return start <= ym && ym <= end; }
    bool contains_year(int year) const { return year >= start.year && year <= end.year; }
    /// Index of `ym` relative to `start`.
    std::size_t index_of(YearMonth ym) const { return static_cast<std::size_t>(ym.serial() - start.serial()); }
    YearMonth at(std::size_t index) const { return start.plus_months(static_cast<long>(index)); }
    /// True when the range covers whole calendar years.
    bool whole_years() const { return start.month == 1 && end.month == 12; }
};

}  // namespace fewsim
