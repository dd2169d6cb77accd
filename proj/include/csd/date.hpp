#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace csd {

// Calendar date, day resolution. All timestamps in the toolkit are plain
// dates; the only place intra-day time exists is the optional acq_time
// field of fire detections.
struct Date {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    auto operator<=>(const Date&) const = default;

    // Days since 1970-01-01 (negative before).
    std::int64_t to_days() const;
    static Date from_days(std::int64_t days);

    Date plus_days(std::int64_t n) const { return from_days(to_days() + n); }

    std::string to_string() const; // YYYY-MM-DD, zero padded

    bool is_valid() const;

    // Strict YYYY-MM-DD. Anything else -> nullopt.
    static std::optional<Date> parse(std::string_view s);
};

// Throwing variant for input paths where a date is required.
Date parse_date_or_throw(std::string_view s, std::string_view context);

int days_in_month(int year, int month);
bool is_leap_year(int year);

} // namespace csd
