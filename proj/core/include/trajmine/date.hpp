#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace trajmine {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
    std::int32_t days = 0;
    auto operator<=>(const Date&) const = default;
};

Date make_date(int year, int month, int day);
void civil_from_days(Date d, int& year, int& month, int& day);

/// Parses "YYYY-MM-DD"; returns nullopt on malformed input.
std::optional<Date> parse_date(std::string_view iso);
std::string to_iso_string(Date d);

/// Whole years elapsed from `birth` to `at` (birthday counting).
int age_in_years(Date birth, Date at);

inline int days_between(Date a, Date b) { return b.days - a.days; }
inline Date add_days(Date d, int n) { return Date{d.days + n}; }

constexpr double kDaysPerYear = 365.25;

inline double years_between(Date a, Date b) {
    return static_cast<double>(days_between(a, b)) / kDaysPerYear;
}

}  // namespace trajmine
