#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "tdqn/error.hpp"

namespace tdqn {

// Calendar date, ISO 8601 text form (YYYY-MM-DD). No timezone handling:
// daily bars are keyed by exchange-local trading day.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[month - 1];
}

inline bool is_valid(const Date& d) {
    if (d.year < 1 || d.year > 9999) return false;
    if (d.month < 1 || d.month > 12) return false;
    return d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

inline Date parse_date(std::string_view text) {
    auto bad = [&] { fail("bad date '", std::string(text), "', expected YYYY-MM-DD"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') bad();
    Date d;
    auto parse_int = [&](std::string_view part, int& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size()) bad();
    };
    parse_int(text.substr(0, 4), d.year);
    parse_int(text.substr(5, 2), d.month);
    parse_int(text.substr(8, 2), d.day);
    if (!is_valid(d)) bad();
    return d;
}

inline std::string to_string(const Date& d) {
    char buf[11];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace tdqn
