#include "csd/fire_analysis.hpp"

#include "csd/error.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

std::int64_t DailyCountSeries::count_on(Date d) const {
    const std::int64_t i = d.to_days() - start_date.to_days();
    if (i < 0 || i >= static_cast<std::int64_t>(counts.size())) return 0;
    return counts[static_cast<std::size_t>(i)];
}

std::int64_t DailyCountSeries::sum_range(Date first, Date last) const {
    const std::int64_t s0 = start_date.to_days();
    std::int64_t lo = std::max(first.to_days() - s0, std::int64_t{0});
    std::int64_t hi = std::min(last.to_days() - s0, static_cast<std::int64_t>(counts.size()) - 1);
    std::int64_t total = 0;
    for (std::int64_t i = lo; i <= hi; ++i) total += counts[static_cast<std::size_t>(i)];
    return total;
}

DailyCountSeries daily_counts(const std::vector<FireDetection>& detections, Date start, Date end) {
    if (end < start) throw ValidationError("daily_counts: start must be <= end");
    DailyCountSeries s;
    s.start_date = start;
    s.counts.assign(static_cast<std::size_t>(end.to_days() - start.to_days() + 1), 0);
    for (const auto& d : detections) {
        const std::int64_t i = d.acq_date.to_days() - start.to_days();
        if (i >= 0 && i < static_cast<std::int64_t>(s.counts.size())) ++s.counts[static_cast<std::size_t>(i)];
    }
    return s;
}

namespace {

constexpr MonthDay kDefaultStart{6, 1};
constexpr MonthDay kDefaultEnd{10, 31};

Date clamp_month_day(int year, MonthDay md) {
    const int d = std::min(md.day, days_in_month(year, md.month));
    return Date{year, md.month, d};
}

} // namespace

OffSeasonWindows detect_off_season(const DailyCountSeries& series, int min_gap_days, int smooth_window,
                                   std::int64_t eps) {
    const std::int64_t n = static_cast<std::int64_t>(series.counts.size());
    if (n < 365) throw ValidationError("detect_off_season: series must span at least one year");
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw ValidationError("detect_off_season: smooth_window must be odd and >= 1");
    if (min_gap_days < 1) throw ValidationError("detect_off_season: min_gap_days must be >= 1");

    // Centered moving sum, window truncated at the series edges.
    const std::int64_t half = (smooth_window - 1) / 2;
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(n) + 1, 0);
    for (std::int64_t i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + series.counts[static_cast<std::size_t>(i)];
    auto smoothed = [&](std::int64_t i) {
        const std::int64_t lo = std::max<std::int64_t>(0, i - half);
        const std::int64_t hi = std::min(n - 1, i + half);
        return prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
    };

    const std::int64_t s0 = series.start_date.to_days();
    const Date end = series.end_date();

    OffSeasonWindows out;
    out.mode = SeasonMode::automatic;
    for (int year = series.start_date.year; year <= end.year; ++year) {
        const std::int64_t y_lo = std::max(Date{year, 1, 1}.to_days() - s0, std::int64_t{0});
        const std::int64_t y_hi = std::min(Date{year, 12, 31}.to_days() - s0, n - 1);
        std::int64_t best_start = -1, best_len = 0;
        std::int64_t run_start = -1;
        for (std::int64_t i = y_lo; i <= y_hi + 1; ++i) {
            const bool quiet = i <= y_hi && smoothed(i) <= eps;
            if (quiet && run_start < 0) run_start = i;
            if (!quiet && run_start >= 0) {
                const std::int64_t len = i - run_start;
                if (len > best_len) {
                    best_len = len;
                    best_start = run_start;
                }
                run_start = -1;
            }
        }
        SeasonWindow w;
        if (best_len >= min_gap_days) {
            w.first_day = Date::from_days(s0 + best_start);
            w.last_day = Date::from_days(s0 + best_start + best_len - 1);
            w.fallback = false;
        } else {
            w.first_day = clamp_month_day(year, kDefaultStart);
            w.last_day = clamp_month_day(year, kDefaultEnd);
            w.fallback = true;
        }
        out.per_year[year] = w;
    }
    return out;
}

OffSeasonWindows fixed_off_season_windows(const DailyCountSeries& series, int first_month, int last_month) {
    if (first_month < 1 || first_month > 12 || last_month < 1 || last_month > 12 || last_month < first_month)
        throw ValidationError("off-season months: require 1 <= first <= last <= 12");
    OffSeasonWindows out;
    out.mode = SeasonMode::fixed;
    const Date end = series.end_date();
    for (int year = series.start_date.year; year <= end.year; ++year) {
        SeasonWindow w;
        w.first_day = Date{year, first_month, 1};
        w.last_day = Date{year, last_month, days_in_month(year, last_month)};
        out.per_year[year] = w;
    }
    return out;
}

ConsensusWindow consensus_off_season(const OffSeasonWindows& windows) {
    std::vector<MonthDay> starts, ends;
    for (const auto& [year, w] : windows.per_year) {
        if (w.fallback) continue;
        starts.push_back(MonthDay{w.first_day.month, w.first_day.day});
        ends.push_back(MonthDay{w.last_day.month, w.last_day.day});
    }
    ConsensusWindow c;
    if (starts.empty()) {
        c.start = kDefaultStart;
        c.end = kDefaultEnd;
        c.from_fallback = true;
        return c;
    }
    auto lower_median = [](std::vector<MonthDay>& v) {
        std::sort(v.begin(), v.end());
        return v[(v.size() - 1) / 2];
    };
    c.start = lower_median(starts);
    c.end = lower_median(ends);
    return c;
}

OffSeasonWindows apply_window_to_years(const DailyCountSeries& series, MonthDay start, MonthDay end,
                                       SeasonMode mode) {
    OffSeasonWindows out;
    out.mode = mode;
    const Date last = series.end_date();
    for (int year = series.start_date.year; year <= last.year; ++year) {
        SeasonWindow w;
        w.first_day = clamp_month_day(year, start);
        w.last_day = clamp_month_day(year, end);
        if (w.last_day < w.first_day)
            throw ValidationError("off-season window inverted for year " + std::to_string(year));
        out.per_year[year] = w;
    }
    return out;
}

std::map<int, std::int64_t> off_season_counts(const DailyCountSeries& series,
                                              const OffSeasonWindows& windows) {
    const Date last = series.end_date();
    std::map<int, std::int64_t> out;
    for (int year = series.start_date.year; year <= last.year; ++year) {
        const auto it = windows.per_year.find(year);
        if (it == windows.per_year.end())
            throw ValidationError("off_season_counts: no window for year " + std::to_string(year));
        out[year] = series.sum_range(it->second.first_day, it->second.last_day);
    }
    return out;
}

AnomalyReport anomaly_zscores(const std::map<int, double>& yearly_counts, const AnomalyParams& params) {
    const std::size_t n = yearly_counts.size();
    if (n < 2) throw ValidationError("anomaly_zscores: need at least 2 years of counts");

    auto population_stats = [](const std::vector<double>& v, double& mu, double& sigma) {
        double sum = 0.0;
        for (double x : v) sum += x;
        mu = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mu) * (x - mu);
        sigma = std::sqrt(ss / static_cast<double>(v.size()));
    };

    std::vector<double> all;
    all.reserve(n);
    for (const auto& [year, c] : yearly_counts) all.push_back(c);
    AnomalyReport report;
    report.params = params;
    population_stats(all, report.mean, report.stddev);

    for (const auto& [year, c] : yearly_counts) {
        AnomalyYear row;
        row.year = year;
        row.count = c;
        double mu = report.mean, sigma = report.stddev;
        if (!params.include_target) {
            std::vector<double> others;
            others.reserve(n - 1);
            for (const auto& [y2, c2] : yearly_counts)
                if (y2 != year) others.push_back(c2);
            population_stats(others, mu, sigma);
        }
        row.z = sigma > 0.0 ? (c - mu) / sigma : 0.0;
        row.flagged = sigma > 0.0 && row.z >= params.z_threshold;
        report.years.push_back(row);
    }
    return report;
}

std::vector<ComparisonRow> export_daily_comparison(const DailyCountSeries& series, int year_a,
                                                   int year_b, int season_start_month) {
    if (season_start_month < 1 || season_start_month > 12)
        throw ValidationError("export_daily_comparison: bad season start month");

    auto span = [&](int year, Date& first, Date& last) {
        first = Date{year, season_start_month, 1};
        const int feb_year = season_start_month > 2 ? year + 1 : year;
        last = Date{feb_year, 2, days_in_month(feb_year, 2)};
        if (first < series.start_date || series.end_date() < last)
            throw ValidationError("export_daily_comparison: series does not cover season-year " +
                                  std::to_string(year));
    };
    Date a_first, a_last, b_first, b_last;
    span(year_a, a_first, a_last);
    span(year_b, b_first, b_last);

    const std::int64_t len_a = a_last.to_days() - a_first.to_days() + 1;
    const std::int64_t len_b = b_last.to_days() - b_first.to_days() + 1;
    const std::int64_t len = std::min(len_a, len_b);

    std::vector<ComparisonRow> rows;
    rows.reserve(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i) {
        ComparisonRow r;
        r.offset = static_cast<int>(i);
        r.count_a = series.count_on(a_first.plus_days(i));
        r.count_b = series.count_on(b_first.plus_days(i));
        rows.push_back(r);
    }
    return rows;
}

} // namespace csd
