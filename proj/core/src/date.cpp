#include "trajmine/date.hpp"

#include <charconv>
#include <cstdio>

namespace trajmine {

namespace {

// Days-from-civil / civil-from-days, valid over the full int32 range.
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

}  // namespace

Date make_date(int year, int month, int day) {
    return Date{days_from_civil(year, month, day)};
}

void civil_from_days(Date date, int& year, int& month, int& day) {
    std::int32_t z = date.days + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = y + (month <= 2);
}

std::optional<Date> parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    auto num = [](std::string_view s, int& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!num(iso.substr(0, 4), y) || !num(iso.substr(5, 2), m) || !num(iso.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    Date date = make_date(y, m, d);
    // Round-trip check rejects impossible dates such as Feb 30.
    int y2, m2, d2;
    civil_from_days(date, y2, m2, d2);
    if (y2 != y || m2 != m || d2 != d) return std::nullopt;
    return date;
}

std::string to_iso_string(Date d) {
    int y, m, day;
    civil_from_days(d, y, m, day);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, day);
    return buf;
}

int age_in_years(Date birth, Date at) {
    int by, bm, bd, ay, am, ad;
    civil_from_days(birth, by, bm, bd);
    civil_from_days(at, ay, am, ad);
    int years = ay - by;
    if (am < bm || (am == bm && ad < bd)) --years;
    return years;
}

}  // namespace trajmine
