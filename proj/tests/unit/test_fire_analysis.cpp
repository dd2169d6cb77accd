#include <doctest.h>

#include "csd/error.hpp"
#include "csd/fire_analysis.hpp"

#include <cmath>
#include <random>

using namespace csd;

namespace {

DailyCountSeries series_over(Date start, Date end) {
    DailyCountSeries s;
    s.start_date = start;
    s.counts.assign(static_cast<std::size_t>(end.to_days() - start.to_days() + 1), 0);
    return s;
}

void set_count(DailyCountSeries& s, Date d, std::int64_t v) {
    s.counts[static_cast<std::size_t>(d.to_days() - s.start_date.to_days())] = v;
}

const AnomalyYear& year_row(const AnomalyReport& r, int year) {
    for (const auto& row : r.years)
        if (row.year == year) return row;
    REQUIRE(false);
    static AnomalyYear dummy;
    return dummy;
}

} // namespace

TEST_CASE("daily_counts basics") {
    SUBCASE("no detections -> all-zero series of correct length") {
        const auto s = daily_counts({}, Date{2017, 1, 1}, Date{2017, 12, 31});
        CHECK(s.counts.size() == 365);
        for (auto c : s.counts) CHECK(c == 0);
    }
    SUBCASE("3 detections on one day") {
        std::vector<FireDetection> dets(4);
        dets[0].acq_date = dets[1].acq_date = dets[2].acq_date = Date{2017, 8, 27};
        dets[3].acq_date = Date{2019, 1, 1}; // outside range, ignored
        const auto s = daily_counts(dets, Date{2017, 8, 1}, Date{2017, 8, 31});
        CHECK(s.count_on(Date{2017, 8, 27}) == 3);
        std::int64_t total = 0;
        for (auto c : s.counts) total += c;
        CHECK(total == 3);
    }
    SUBCASE("inverted range") {
        CHECK_THROWS_AS(daily_counts({}, Date{2017, 2, 1}, Date{2017, 1, 1}), ValidationError);
    }
}

TEST_CASE("daily count conservation over a partition") {
    std::mt19937 gen(7);
    std::vector<FireDetection> dets(500);
    const Date start{2016, 1, 1}, end{2017, 12, 31};
    const auto span = end.to_days() - start.to_days();
    for (auto& d : dets) d.acq_date = start.plus_days(std::uniform_int_distribution<std::int64_t>(0, span)(gen));
    const auto all = daily_counts(dets, start, end);
    std::int64_t total = 0;
    for (auto c : all.counts) total += c;
    CHECK(total == 500);
    // split the range at an arbitrary date; halves must sum to the whole
    const Date mid{2016, 9, 14};
    const auto left = daily_counts(dets, start, mid);
    const auto right = daily_counts(dets, mid.plus_days(1), end);
    std::int64_t lt = 0, rt = 0;
    for (auto c : left.counts) lt += c;
    for (auto c : right.counts) rt += c;
    CHECK(lt + rt == total);
}

TEST_CASE("detect_off_season finds the quiet window") {
    // zero exactly June 1 - Oct 31 each year, positive otherwise
    auto s = series_over(Date{2015, 1, 1}, Date{2017, 12, 31});
    for (std::size_t i = 0; i < s.counts.size(); ++i) {
        const Date d = s.start_date.plus_days(static_cast<std::int64_t>(i));
        const bool quiet = (d.month > 6 || (d.month == 6 && d.day >= 1)) && d.month <= 10;
        s.counts[i] = quiet ? 0 : 5;
    }
    const auto w = detect_off_season(s, 14, 1, 0); // no smoothing: exact boundaries
    REQUIRE(w.per_year.size() == 3);
    for (const auto& [year, win] : w.per_year) {
        CHECK(win.first_day == Date{year, 6, 1});
        CHECK(win.last_day == Date{year, 10, 31});
        CHECK(!win.fallback);
    }

    SUBCASE("smoothing shaves half a window from each edge") {
        const auto w7 = detect_off_season(s, 14, 7, 0);
        for (const auto& [year, win] : w7.per_year) {
            CHECK(win.first_day == Date{year, 6, 4});
            CHECK(win.last_day == Date{year, 10, 28});
        }
    }
}

TEST_CASE("detect_off_season falls back when always burning") {
    auto s = series_over(Date{2016, 1, 1}, Date{2017, 12, 31});
    for (auto& c : s.counts) c = 3;
    const auto w = detect_off_season(s);
    REQUIRE(w.per_year.size() == 2);
    for (const auto& [year, win] : w.per_year) {
        CHECK(win.fallback);
        CHECK(win.first_day == Date{year, 6, 1});
        CHECK(win.last_day == Date{year, 10, 31});
    }
}

TEST_CASE("detect_off_season rejects short series") {
    auto s = series_over(Date{2017, 1, 1}, Date{2017, 6, 30});
    CHECK_THROWS_AS(detect_off_season(s), ValidationError);
}

TEST_CASE("detect_off_season with window 1 equals maximal zero runs (brute force)") {
    std::mt19937 gen(99);
    for (int trial = 0; trial < 25; ++trial) {
        const int years = 1 + static_cast<int>(gen() % 3);
        auto s = series_over(Date{2014, 1, 1}, Date{2013 + years, 12, 31});
        for (auto& c : s.counts) c = (gen() % 100 < 70) ? 0 : static_cast<std::int64_t>(gen() % 4 + 1);

        const int min_gap = 5;
        const auto got = detect_off_season(s, min_gap, 1, 0);
        for (int year = 2014; year <= 2013 + years; ++year) {
            // brute force: longest zero run within the year, earliest on ties
            const std::int64_t y0 = Date{year, 1, 1}.to_days() - s.start_date.to_days();
            const std::int64_t y1 = Date{year, 12, 31}.to_days() - s.start_date.to_days();
            std::int64_t best_start = -1, best_len = 0, run_start = -1;
            for (std::int64_t i = y0; i <= y1 + 1; ++i) {
                const bool zero = i <= y1 && s.counts[static_cast<std::size_t>(i)] == 0;
                if (zero && run_start < 0) run_start = i;
                if (!zero && run_start >= 0) {
                    if (i - run_start > best_len) {
                        best_len = i - run_start;
                        best_start = run_start;
                    }
                    run_start = -1;
                }
            }
            const auto& win = got.per_year.at(year);
            if (best_len >= min_gap) {
                CHECK(!win.fallback);
                CHECK(win.first_day == s.start_date.plus_days(best_start));
                CHECK(win.last_day == s.start_date.plus_days(best_start + best_len - 1));
            } else {
                CHECK(win.fallback);
            }
        }
    }
}

TEST_CASE("off_season_counts") {
    auto s = series_over(Date{2016, 1, 1}, Date{2018, 12, 31});
    const auto windows = fixed_off_season_windows(s); // Jun..Oct
    SUBCASE("all-zero series") {
        for (const auto& [year, c] : off_season_counts(s, windows)) CHECK(c == 0);
    }
    SUBCASE("one detection inside the 2017 window") {
        set_count(s, Date{2017, 7, 15}, 1);
        const auto counts = off_season_counts(s, windows);
        CHECK(counts.at(2016) == 0);
        CHECK(counts.at(2017) == 1);
        CHECK(counts.at(2018) == 0);
    }
    SUBCASE("window boundaries are inclusive") {
        set_count(s, Date{2017, 6, 1}, 2);
        set_count(s, Date{2017, 10, 31}, 3);
        set_count(s, Date{2017, 5, 31}, 7);  // outside
        set_count(s, Date{2017, 11, 1}, 11); // outside
        CHECK(off_season_counts(s, windows).at(2017) == 5);
    }
}

TEST_CASE("anomaly_zscores matches the high-precision oracle") {
    // counts {10, 8, 12, 167, 9, 5}; frozen from an independent 50-digit
    // decimal computation (population std):
    const double mu_expected = 35.166666666666666666666666667;
    const double sigma_expected = 58.995527137421377754093010801;
    const double z167_expected = 2.2346326870890911899002005576;
    const double z5_expected = -0.51133820020622693473064007701;

    std::map<int, double> counts{{2012, 10}, {2013, 8}, {2014, 12}, {2015, 167}, {2016, 9}, {2017, 5}};
    const auto report = anomaly_zscores(counts);
    CHECK(report.mean == doctest::Approx(mu_expected).epsilon(1e-12));
    CHECK(report.stddev == doctest::Approx(sigma_expected).epsilon(1e-12));
    CHECK(year_row(report, 2015).z == doctest::Approx(z167_expected).epsilon(1e-12));
    CHECK(year_row(report, 2017).z == doctest::Approx(z5_expected).epsilon(1e-12));
    CHECK(year_row(report, 2015).flagged);
    CHECK(!year_row(report, 2012).flagged);

    // independent long-double path
    long double mu = 0.0L;
    for (const auto& [y, c] : counts) mu += static_cast<long double>(c);
    mu /= 6.0L;
    long double ss = 0.0L;
    for (const auto& [y, c] : counts) ss += (c - mu) * (c - mu);
    const long double sigma = std::sqrt(ss / 6.0L);
    CHECK(report.stddev == doctest::Approx(static_cast<double>(sigma)).epsilon(1e-12));
}

TEST_CASE("anomaly_zscores paper-statistic fixture") {
    // mu = 29.75 exactly, sigma = 50.8254... -> z = 2.70042 (within the
    // spec's 2.70 +- 0.01)
    std::map<int, double> counts{{2011, 0},  {2012, 0},    {2013, 0},   {2014, 2},    {2015, 6},
                                 {2016, 14.5}, {2017, 167}, {2018, 36.5}, {2019, 41.75}};
    const auto report = anomaly_zscores(counts);
    CHECK(report.mean == doctest::Approx(29.75).epsilon(1e-15));
    CHECK(report.stddev == doctest::Approx(50.825409218443310).epsilon(1e-12));
    CHECK(year_row(report, 2017).z == doctest::Approx(2.7004209530337692).epsilon(1e-12));
    CHECK(std::abs(year_row(report, 2017).z - 2.70) <= 0.01);
}

TEST_CASE("anomaly_zscores edge rules") {
    SUBCASE("all years equal -> sigma 0, z 0, none flagged") {
        std::map<int, double> counts{{2015, 4}, {2016, 4}, {2017, 4}};
        const auto report = anomaly_zscores(counts);
        CHECK(report.stddev == 0.0);
        for (const auto& row : report.years) {
            CHECK(row.z == 0.0);
            CHECK(!row.flagged);
        }
    }
    SUBCASE("fewer than 2 years") {
        CHECK_THROWS_AS(anomaly_zscores(std::map<int, double>{{2017, 4}}), ValidationError);
    }
    SUBCASE("leave-one-out mode") {
        std::map<int, double> counts{{2014, 10}, {2015, 10}, {2016, 10}, {2017, 100}};
        AnomalyParams p;
        p.include_target = false;
        const auto report = anomaly_zscores(counts, p);
        // others of 2017 are {10,10,10}: sigma 0 -> z forced to 0
        CHECK(year_row(report, 2017).z == 0.0);
        // others of 2014 are {10,10,100}: mu 40, sigma sqrt(1800)
        CHECK(year_row(report, 2014).z ==
              doctest::Approx((10.0 - 40.0) / std::sqrt(1800.0)).epsilon(1e-12));
    }
}

TEST_CASE("anomaly z-score invariances") {
    std::mt19937 gen(4242);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<int, double> counts;
        for (int y = 2012; y < 2020; ++y) counts[y] = static_cast<double>(gen() % 200);
        const auto base = anomaly_zscores(counts);
        if (base.stddev == 0.0) continue;

        auto argmax = [](const AnomalyReport& r) {
            int best = r.years.front().year;
            double bz = r.years.front().z;
            for (const auto& row : r.years)
                if (row.z > bz) {
                    bz = row.z;
                    best = row.year;
                }
            return best;
        };

        // adding a constant preserves the argmax year
        std::map<int, double> shifted;
        for (const auto& [y, c] : counts) shifted[y] = c + 37.0;
        const auto sh = anomaly_zscores(shifted);
        CHECK(argmax(sh) == argmax(base));

        // scaling by lambda > 0 preserves every z
        std::map<int, double> scaled;
        for (const auto& [y, c] : counts) scaled[y] = c * 3.5;
        const auto sc = anomaly_zscores(scaled);
        for (std::size_t i = 0; i < base.years.size(); ++i)
            CHECK(sc.years[i].z == doctest::Approx(base.years[i].z).epsilon(1e-9));
    }
}

TEST_CASE("consensus window is the median of detected boundaries") {
    OffSeasonWindows w;
    w.mode = SeasonMode::automatic;
    w.per_year[2014] = {Date{2014, 6, 18}, Date{2014, 9, 27}, false};
    w.per_year[2015] = {Date{2015, 6, 17}, Date{2015, 9, 28}, false};
    w.per_year[2016] = {Date{2016, 6, 18}, Date{2016, 8, 21}, false}; // corrupted year
    w.per_year[2017] = {Date{2017, 6, 1}, Date{2017, 10, 31}, true};  // fallback: excluded
    const auto c = consensus_off_season(w);
    CHECK(c.start == MonthDay{6, 18});
    CHECK(c.end == MonthDay{9, 27});
    CHECK(!c.from_fallback);

    OffSeasonWindows all_fallback;
    all_fallback.per_year[2014] = {Date{2014, 6, 1}, Date{2014, 10, 31}, true};
    const auto f = consensus_off_season(all_fallback);
    CHECK(f.from_fallback);
    CHECK(f.start == MonthDay{6, 1});
    CHECK(f.end == MonthDay{10, 31});
}

TEST_CASE("export_daily_comparison") {
    auto s = series_over(Date{2015, 1, 1}, Date{2018, 12, 31});
    set_count(s, Date{2017, 9, 1}, 4);
    set_count(s, Date{2016, 9, 1}, 1);
    set_count(s, Date{2018, 2, 10}, 2); // offset within 2017 season-year

    SUBCASE("same year on both columns") {
        const auto rows = export_daily_comparison(s, 2017, 2017);
        for (const auto& r : rows) CHECK(r.count_a == r.count_b);
    }
    SUBCASE("burst year vs quiet year") {
        const auto rows = export_daily_comparison(s, 2016, 2017);
        // Jun 1 -> Sep 1 is offset 92
        CHECK(rows[92].count_a == 1);
        CHECK(rows[92].count_b == 4);
        // leap alignment: 2016 season-year spans Jun 1 2016 - Feb 28 2017 (273 days);
        // 2017 spans Jun 1 2017 - Feb 28 2018 (273 days)
        CHECK(rows.size() == 273);
        const auto d = Date{2018, 2, 10}.to_days() - Date{2017, 6, 1}.to_days();
        CHECK(rows[static_cast<std::size_t>(d)].count_b == 2);
    }
    SUBCASE("season-year crossing a leap February truncates to the shorter span") {
        const auto rows = export_daily_comparison(s, 2015, 2016);
        // 2015 season-year ends Feb 29 2016 (274 days); 2016 ends Feb 28 2017 (273)
        CHECK(rows.size() == 273);
    }
    SUBCASE("uncovered season-year is an error") {
        CHECK_THROWS_AS(export_daily_comparison(s, 2018, 2017), ValidationError);
    }
}
