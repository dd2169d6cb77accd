#pragma once

#include "csd/date.hpp"
#include "csd/firms.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace csd {

// One count per day from start_date, zeros where nothing was detected.
struct DailyCountSeries {
    Date start_date;
    std::vector<std::int64_t> counts;

    Date end_date() const { return start_date.plus_days(static_cast<std::int64_t>(counts.size()) - 1); }
    std::int64_t count_on(Date d) const;
    std::int64_t sum_range(Date first, Date last) const; // inclusive, clipped to coverage
};

struct MonthDay {
    int month = 1;
    int day = 1;
    auto operator<=>(const MonthDay&) const = default;
};

struct SeasonWindow {
    Date first_day;
    Date last_day;
    bool fallback = false; // no qualifying quiet run; fixed default substituted
};

enum class SeasonMode { fixed, automatic };

struct OffSeasonWindows {
    std::map<int, SeasonWindow> per_year;
    SeasonMode mode = SeasonMode::automatic;
};

struct AnomalyYear {
    int year = 0;
    double count = 0.0;
    double z = 0.0;
    bool flagged = false;
};

struct AnomalyParams {
    double z_threshold = 2.0;
    bool include_target = true; // paper convention: the extreme year stays in mu/sigma
};

struct AnomalyReport {
    std::vector<AnomalyYear> years; // ascending by year
    double mean = 0.0;              // over all years
    double stddev = 0.0;            // population (divide by N)
    AnomalyParams params;
};

DailyCountSeries daily_counts(const std::vector<FireDetection>& detections, Date start, Date end);

// Per calendar year, the longest run (>= min_gap_days) of days whose centered
// moving sum (window smooth_window, truncated at the series edges) is <= eps.
// Years without a qualifying run get the fixed default window (Jun 1 - Oct 31)
// and are marked fallback.
OffSeasonWindows detect_off_season(const DailyCountSeries& series, int min_gap_days = 14,
                                   int smooth_window = 7, std::int64_t eps = 0);

// Fixed month-range windows (default June..October inclusive) for every year
// the series touches.
OffSeasonWindows fixed_off_season_windows(const DailyCountSeries& series, int first_month = 6,
                                          int last_month = 10);

// Lower-median consensus of per-year detected boundaries (fallback years are
// excluded; if every year fell back, the fixed default is returned). This is
// the window the anomaly pipeline applies to every year: a single season
// definition derived from all years, so one anomalous year cannot redefine
// its own off-season.
struct ConsensusWindow {
    MonthDay start{6, 1};
    MonthDay end{10, 31};
    bool from_fallback = false;
};
ConsensusWindow consensus_off_season(const OffSeasonWindows& windows);
OffSeasonWindows apply_window_to_years(const DailyCountSeries& series, MonthDay start, MonthDay end,
                                       SeasonMode mode);

std::map<int, std::int64_t> off_season_counts(const DailyCountSeries& series,
                                              const OffSeasonWindows& windows);

AnomalyReport anomaly_zscores(const std::map<int, double>& yearly_counts,
                              const AnomalyParams& params = {});

// Day-aligned comparison of two season-years: rows run from <month> 1 of each
// year through the last day of the following February, truncated to the
// shorter span.
struct ComparisonRow {
    int offset = 0;
    std::int64_t count_a = 0;
    std::int64_t count_b = 0;
};
std::vector<ComparisonRow> export_daily_comparison(const DailyCountSeries& series, int year_a,
                                                   int year_b, int season_start_month = 6);

} // namespace csd
