#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "trendcast/errors.hpp"

namespace trendcast {

/// Calendar date as a day count since 1970-01-01, with ISO-8601 text I/O
/// and the weekday arithmetic the alignment and split logic rely on.
class Date {
public:
    Date() = default;

    static Date from_serial(int days_since_epoch) { return Date(days_since_epoch); }

    static Date from_ymd(int year, unsigned month, unsigned day) {
        const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                              std::chrono::day{day}};
        if (!ymd.ok())
            throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                            std::to_string(month) + "-" + std::to_string(day));
        return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
    }

    /// Strict `YYYY-MM-DD`; std::nullopt on anything else.
    static std::optional<Date> parse_iso(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
        auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
            int value = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                const char c = text[i];
                if (c < '0' || c > '9') return std::nullopt;
                value = value * 10 + (c - '0');
            }
            return value;
        };
        const auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
        if (!y || !m || !d) return std::nullopt;
        const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                              std::chrono::month{static_cast<unsigned>(*m)},
                                              std::chrono::day{static_cast<unsigned>(*d)}};
        if (!ymd.ok()) return std::nullopt;
        return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
    }

    std::string to_iso() const {
        const auto ymd = to_ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    int serial() const { return serial_; }
    int year() const { return static_cast<int>(to_ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(to_ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(to_ymd().day()); }

    /// 0 = Monday .. 6 = Sunday.
    int weekday_mon0() const {
        const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{serial_}}};
        return static_cast<int>(wd.iso_encoding()) - 1;
    }

    bool is_weekday() const { return weekday_mon0() < 5; }

    Date plus_days(int n) const { return Date(serial_ + n); }

    /// Same month/day `n` years earlier, clamped to month length (Feb 29 -> Feb 28).
    Date minus_years(int n) const {
        const auto ymd = to_ymd();
        const std::chrono::year y = ymd.year() - std::chrono::years{n};
        std::chrono::year_month_day moved{y, ymd.month(), ymd.day()};
        if (!moved.ok()) moved = y / ymd.month() / std::chrono::last;
        return Date(std::chrono::sys_days{moved}.time_since_epoch().count());
    }

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(int serial) : serial_(serial) {}

    std::chrono::year_month_day to_ymd() const {
        return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{serial_}}};
    }

    int serial_ = 0;
};

inline Date first_weekday_on_or_after(Date d) {
    while (!d.is_weekday()) d = d.plus_days(1);
    return d;
}

inline Date last_weekday_on_or_before(Date d) {
    while (!d.is_weekday()) d = d.plus_days(-1);
    return d;
}

inline Date next_weekday(Date d) { return first_weekday_on_or_after(d.plus_days(1)); }

/// Number of Monday-Friday dates in [first, last], inclusive.
inline long weekday_count(Date first, Date last) {
    if (first > last) return 0;
    long count = 0;
    // Align to a Monday, then count whole weeks in one step.
    Date d = first;
    while (d.weekday_mon0() != 0 && d <= last) {
        if (d.is_weekday()) ++count;
        d = d.plus_days(1);
    }
    if (d > last) return count;
    const long whole_weeks = (last.serial() - d.serial() + 1) / 7;
    count += 5 * whole_weeks;
    d = d.plus_days(static_cast<int>(7 * whole_weeks));
    while (d <= last) {
        if (d.is_weekday()) ++count;
        d = d.plus_days(1);
    }
    return count;
}

inline Date jan1(int year) { return Date::from_ymd(year, 1, 1); }
inline Date dec31(int year) { return Date::from_ymd(year, 12, 31); }

} // namespace trendcast
