#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "flexsac/errors.hpp"

namespace flexsac {

/// Minutes since 1970-01-01T00:00Z. All simulation clocks are UTC-naive;
/// an offset in a parsed timestamp is folded in.
using Minutes = std::int64_t;

inline constexpr Minutes kMinutesPerHour = 60;
inline constexpr Minutes kMinutesPerDay = 24 * 60;

inline Minutes make_time(int year, unsigned month, unsigned day, int hour = 0, int minute = 0) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ConfigError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
                          std::to_string(day));
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Minutes>(days) * kMinutesPerDay + hour * kMinutesPerHour + minute;
}

struct CivilTime {
    int year;
    unsigned month;
    unsigned day;
    int hour;
    int minute;
};

inline CivilTime to_civil(Minutes t) {
    using namespace std::chrono;
    Minutes days = t / kMinutesPerDay;
    Minutes rem = t % kMinutesPerDay;
    if (rem < 0) {
        rem += kMinutesPerDay;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
            static_cast<int>(rem / 60), static_cast<int>(rem % 60)};
}

/// ISO weekday, Monday = 1 ... Sunday = 7.
inline int iso_weekday(Minutes t) {
    using namespace std::chrono;
    Minutes days = t / kMinutesPerDay;
    if (t % kMinutesPerDay < 0) --days;
    return static_cast<int>(weekday{sys_days{std::chrono::days{days}}}.iso_encoding());
}

/// Hour of day, 0..23.
inline int hour_of_day(Minutes t) {
    Minutes rem = t % kMinutesPerDay;
    if (rem < 0) rem += kMinutesPerDay;
    return static_cast<int>(rem / 60);
}

inline std::string format_rfc3339(Minutes t) {
    const CivilTime c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00Z", c.year, c.month, c.day, c.hour, c.minute);
    return buf;
}

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM|-HH:MM]`. A space is accepted in
/// place of `T`. Seconds must be zero (the simulator runs on whole minutes).
inline Minutes parse_rfc3339(std::string_view s) {
    auto fail = [&]() -> Minutes { throw ConfigError("bad RFC 3339 timestamp '" + std::string(s) + "'"); };
    auto digits = [&](std::size_t pos, std::size_t n) {
        if (pos + n > s.size()) fail();
        int v = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (s[i] < '0' || s[i] > '9') fail();
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
        s[13] != ':') {
        fail();
    }
    const int year = digits(0, 4);
    const int month = digits(5, 2);
    const int day = digits(8, 2);
    const int hour = digits(11, 2);
    const int minute = digits(14, 2);
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (digits(pos + 1, 2) != 0) fail();
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                if (s[pos] != '0') fail();
                ++pos;
            }
        }
    }
    Minutes offset = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' || s[pos] == 'z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            if (pos + 6 > s.size() || s[pos + 3] != ':') fail();
            offset = sign * (digits(pos + 1, 2) * 60 + digits(pos + 4, 2));
            pos += 6;
        }
    }
    if (pos != s.size() || hour > 23 || minute > 59 || month < 1 || month > 12) fail();
    return make_time(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour, minute) - offset;
}

}  // namespace flexsac
