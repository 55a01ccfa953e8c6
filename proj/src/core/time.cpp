#include "fewsim/core/time.hpp"

#include <charconv>

#include <fmt/core.h>

#include "fewsim/core/errors.hpp"

namespace fewsim {

YearMonth YearMonth::from_serial(long serial) {
    long year = serial / 12;
    long month = serial % 12;
    if (month < 0) {
        month += 12;
        year -= 1;
    }
    return {static_cast<int>(year), static_cast<int>(month) + 1};
}

std::string YearMonth::to_string() const { return fmt::format("{:04d}-{:02d}", year, month); }

YearMonth YearMonth::parse(std::string_view text) {
    YearMonth ym;
    auto dash = text.find('-');
    if (dash == std::string_view::npos) {
        throw ValidationError("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    auto y = std::from_chars(text.data(), text.data() + dash, ym.year);
    auto m = std::from_chars(text.data() + dash + 1, text.data() + text.size(), ym.month);
    if (y.ec != std::errc{} || m.ec != std::errc{} || m.ptr != text.data() + text.size() ||
        ym.month < 1 || ym.month > 12) {
        throw ValidationError("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    return ym;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

double hours_in_month(int year, int month) { return 24.0 * days_in_month(year, month); }

}  // namespace fewsim
