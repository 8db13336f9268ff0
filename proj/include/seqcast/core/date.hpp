#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

namespace seqcast::core {

/// Calendar date (proleptic Gregorian). Day-level resolution only.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01 (negative before). Howard Hinnant's civil algorithm.
    std::int64_t serial() const {
        std::int64_t y = year;
        const std::int64_t m = month;
        const std::int64_t d = day;
        y -= m <= 2;
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const std::int64_t yoe = y - era * 400;
        const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + doe - 719468;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    bool valid() const {
        if (month < 1 || month > 12 || day < 1) return false;
        static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        int len = lengths[month - 1];
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        if (month == 2 && leap) len = 29;
        return day <= len;
    }
};

/// Parses strict `YYYY-MM-DD`. Returns false on malformed or impossible dates.
inline bool parse_date(const std::string& text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    Date d;
    d.year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    d.month = (text[5] - '0') * 10 + (text[6] - '0');
    d.day = (text[8] - '0') * 10 + (text[9] - '0');
    if (!d.valid()) return false;
    out = d;
    return true;
}

/// Calendar-day distance b - a.
inline std::int64_t days_between(const Date& a, const Date& b) {
    return b.serial() - a.serial();
}

/// Date shifted forward by n calendar days.
inline Date add_days(const Date& d, int n) {
    std::int64_t z = d.serial() + n + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t day = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(day)};
}

}  // namespace seqcast::core
