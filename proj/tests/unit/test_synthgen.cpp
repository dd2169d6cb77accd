#include <doctest.h>

#include "csd/error.hpp"
#include "csd/rng.hpp"
#include "csd/synthgen.hpp"

#include <cmath>

using namespace csd;

namespace {

BBox rakhine_bbox() {
    return BBox{92.1, 20.6, 92.7, 21.3};
}

FireSceneSpec small_fire_spec() {
    FireSceneSpec spec;
    spec.bbox = rakhine_bbox();
    spec.start_date = Date{2014, 1, 1};
    spec.end_date = Date{2015, 12, 31};
    spec.base_rate = 2.0;
    spec.peak_rate = 4.0;
    spec.agri_centers = {{92.25, 20.75}, {92.5, 20.9}};
    spec.sigma_agri_m = 3000.0;
    spec.seed = 42;
    return spec;
}

GridSpec grid10m(int w, int h) {
    GridSpec g;
    g.x0 = 0.0;
    g.y0 = 0.0;
    g.dx = 10.0;
    g.dy = -10.0;
    g.width = w;
    g.height = h;
    g.crs = "LOCAL";
    return g;
}

Polygon rect(double x0, double y0, double x1, double y1) {
    return Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

} // namespace

TEST_CASE("rng transforms have the right first moments") {
    Rng rng(1234);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(4.0) / 4.0;
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 1.0) < 0.01);       // speckle mean 1
    CHECK(std::abs(var - 0.25) < 0.01);       // variance 1/L

    double psum = 0.0;
    for (int i = 0; i < 50000; ++i) psum += static_cast<double>(rng.poisson(3.7));
    CHECK(std::abs(psum / 50000 - 3.7) < 0.1);

    // shape < 1 branch (boost transform)
    double gsum = 0.0;
    for (int i = 0; i < 100000; ++i) gsum += rng.gamma(0.5);
    CHECK(std::abs(gsum / 100000 - 0.5) < 0.02);

    double bsum = 0.0;
    for (int i = 0; i < 50000; ++i) {
        const double b = rng.beta(0.25 * 20, 0.75 * 20);
        CHECK(b > 0.0);
        CHECK(b < 1.0);
        bsum += b;
    }
    CHECK(std::abs(bsum / 50000 - 0.25) < 0.01);

    // large-lambda split keeps the mean
    double lsum = 0.0;
    for (int i = 0; i < 20000; ++i) lsum += static_cast<double>(rng.poisson(95.0));
    CHECK(std::abs(lsum / 20000 - 95.0) < 1.0);
}

TEST_CASE("fire catalog: deterministic, parseable, fully labeled") {
    const auto spec = small_fire_spec();
    const auto cat1 = gen_fire_catalog(spec);
    const auto cat2 = gen_fire_catalog(spec);
    CHECK(cat1.csv == cat2.csv);                         // byte determinism
    CHECK(cat1.truth.dump() == cat2.truth.dump());

    const auto res = parse_firms_csv_text(cat1.csv, {}, "<gen>");
    CHECK(res.skipped() == 0);                           // every row parses
    CHECK(res.total_rows == cat1.truth.at("n_total").get<std::size_t>());
    CHECK(res.detections.size() == res.total_rows);

    // in-bbox labels agree with a bbox-filtered parse
    ParseOptions opts;
    opts.bbox = spec.bbox;
    const auto filtered = parse_firms_csv_text(cat1.csv, opts, "<gen>");
    CHECK(filtered.detections.size() == cat1.truth.at("n_in_bbox").get<std::size_t>());

    // per-event labels line up with rows
    const auto& classes = cat1.truth.at("per_event_class");
    CHECK(classes.size() == res.total_rows);

    // daily maps sum to the class totals
    std::int64_t agri = 0;
    for (const auto& [k, v] : cat1.truth.at("daily_agricultural").items()) agri += v.get<std::int64_t>();
    CHECK(agri == cat1.truth.at("n_agricultural").get<std::int64_t>());

    // quiet window really is quiet: no agricultural events inside it
    for (const auto& [k, v] : cat1.truth.at("daily_agricultural").items()) {
        const Date d = *Date::parse(k);
        const bool in_quiet =
            MonthDay{d.month, d.day} >= spec.quiet_start && MonthDay{d.month, d.day} <= spec.quiet_end;
        CHECK(!in_quiet);
    }
}

TEST_CASE("fire catalog: zero rates and no anomaly give a header-only CSV") {
    auto spec = small_fire_spec();
    spec.base_rate = 0.0;
    spec.peak_rate = 0.0;
    spec.agri_centers.clear();
    const auto cat = gen_fire_catalog(spec);
    CHECK(cat.csv == "latitude,longitude,acq_date,acq_time,confidence,instrument\n");
    CHECK(cat.truth.at("n_total") == 0);
}

TEST_CASE("fire catalog: anomaly burst is recorded in truth") {
    auto spec = small_fire_spec();
    AnomalySpec an;
    an.start_date = Date{2015, 8, 25};
    an.end_date = Date{2015, 10, 31};
    an.expected_total = 167.0;
    an.centers = {{92.35, 21.05}, {92.4, 21.1}};
    an.sigma_m = 1200.0;
    spec.anomaly = an;
    const auto cat = gen_fire_catalog(spec);
    const auto actual = cat.truth.at("anomaly").at("actual_total").get<std::int64_t>();
    CHECK(actual > 120);
    CHECK(actual < 220); // Poisson(167) stays well within this
    std::int64_t anom = 0;
    for (const auto& [k, v] : cat.truth.at("daily_anomalous").items()) {
        anom += v.get<std::int64_t>();
        const Date d = *Date::parse(k);
        CHECK(!(d < an.start_date));
        CHECK(!(an.end_date < d));
    }
    CHECK(anom == actual);
}

TEST_CASE("fixed off-season counts equal burst plus in-window background from truth") {
    auto spec = small_fire_spec();
    spec.quiet_start = MonthDay{6, 15}; // Jun 1-14 and all of October stay active
    spec.quiet_end = MonthDay{9, 30};
    AnomalySpec an;
    an.start_date = Date{2015, 8, 25};
    an.end_date = Date{2015, 10, 31};
    an.expected_total = 167.0;
    an.centers = {{92.35, 21.05}};
    an.sigma_m = 1200.0;
    spec.end_date = Date{2015, 12, 31};
    spec.anomaly = an;
    const auto cat = gen_fire_catalog(spec);

    const auto parsed = parse_firms_csv_text(cat.csv, {}, "<gen>");
    REQUIRE(parsed.skipped() == 0);
    const auto series = daily_counts(parsed.detections, spec.start_date, spec.end_date);
    const auto windows = fixed_off_season_windows(series); // June..October inclusive
    const auto counts = off_season_counts(series, windows);

    auto truth_window_sum = [&](const char* key, int year) {
        std::int64_t total = 0;
        for (const auto& [k, v] : cat.truth.at(key).items()) {
            const Date d = *Date::parse(k);
            if (d.year == year && d.month >= 6 && d.month <= 10) total += v.get<std::int64_t>();
        }
        return total;
    };
    for (int year = 2014; year <= 2015; ++year) {
        const std::int64_t expected =
            truth_window_sum("daily_anomalous", year) + truth_window_sum("daily_agricultural", year);
        CHECK(counts.at(year) == expected);
    }
    // the background share inside the window is nonzero by construction
    CHECK(truth_window_sum("daily_agricultural", 2015) > 0);
    CHECK(truth_window_sum("daily_anomalous", 2015) > 100);
}

TEST_CASE("gen_settlements") {
    const auto empty = gen_settlements(0, rakhine_bbox(), 7);
    CHECK(empty.points.empty());
    CHECK(empty.geojson.at("features").empty());

    const auto s1 = gen_settlements(25, rakhine_bbox(), 7);
    const auto s2 = gen_settlements(25, rakhine_bbox(), 7);
    CHECK(s1.points.size() == 25);
    CHECK(s1.geojson.dump() == s2.geojson.dump());
    for (const auto& p : s1.points) CHECK(rakhine_bbox().contains(p.lon, p.lat));
    CHECK_THROWS_AS(gen_settlements(-1, rakhine_bbox(), 7), ValidationError);
}

TEST_CASE("rasterize_polygon counts interior cell centers") {
    const GridSpec g = grid10m(10, 10);
    // full commitment of cells whose centers fall inside x in (20, 60), y in (-70, -30)
    const auto mask = rasterize_polygon(g, rect(20.0, -30.0, 60.0, -70.0));
    std::size_t count = 0;
    for (auto m : mask) count += m;
    CHECK(count == 16); // cols 2..5, rows 3..6
    CHECK(mask[3 * 10 + 2] == 1);
    CHECK(mask[2 * 10 + 2] == 0);
    CHECK(rasterize_polygon(g, {}).size() == 100);
}

TEST_CASE("backscatter stack: speckle statistics and the razing step") {
    SarSceneSpec spec;
    spec.grid = grid10m(16, 16);
    for (int i = 0; i < 8; ++i) spec.dates.push_back(Date{2017, 1, 1}.plus_days(i * 12));
    spec.mu_pre = 0.5;
    spec.enl = 1e6; // nearly deterministic speckle
    spec.drop_db = -3.0;
    spec.change_date = spec.dates[4];
    spec.footprint = rect(20.0, -30.0, 120.0, -110.0);
    spec.seed = 99;

    const auto scene = gen_backscatter_stack(spec);
    scene.stack.validate();
    CHECK(scene.truth.at("first_post_index") == 4);
    const auto fp = scene.truth.at("footprint_pixel_count").get<std::size_t>();
    CHECK(fp == 80); // 10 x 8 cells
    const double factor = std::pow(10.0, -0.3);

    for (std::size_t li = 0; li < scene.stack.size(); ++li) {
        const bool post = li >= 4;
        const Raster& layer = scene.stack.layers[li];
        for (std::size_t p = 0; p < layer.values.size(); ++p) {
            const bool in_fp = scene.truth_mask.values[p] == 1.0f;
            const double mean = spec.mu_pre * (post && in_fp ? factor : 1.0);
            CHECK(std::abs(layer.values[p] - mean) < 0.01 * mean); // var 1/L with huge L
        }
    }

    // determinism across calls
    const auto again = gen_backscatter_stack(spec);
    for (std::size_t li = 0; li < scene.stack.size(); ++li)
        CHECK(again.stack.layers[li].values == scene.stack.layers[li].values);

    // drop_db = 0 means pre and post are statistically identical by construction
    SarSceneSpec flat = spec;
    flat.drop_db = 0.0;
    flat.enl = 4.0;
    const auto nochange = gen_backscatter_stack(flat);
    double pre = 0.0, post = 0.0;
    for (std::size_t p = 0; p < 256; ++p) {
        pre += nochange.stack.layers[0].values[p];
        post += nochange.stack.layers[7].values[p];
    }
    CHECK(std::abs(pre / 256 - flat.mu_pre) < 0.1 * flat.mu_pre);
    CHECK(std::abs(post / 256 - flat.mu_pre) < 0.1 * flat.mu_pre);
}

TEST_CASE("coherence stack: modes, bounds, and onset handling") {
    CoherenceSceneSpec spec;
    spec.grid = grid10m(24, 24);
    for (int i = 0; i < 6; ++i) spec.dates.push_back(Date{2018, 1, 5}.plus_days(i * 12));
    spec.footprint = rect(40.0, -40.0, 200.0, -200.0);
    spec.onset_index = 3;
    spec.seed = 5;

    const auto scene = gen_coherence_stack(spec);
    scene.stack.validate();
    for (const auto& layer : scene.stack.layers)
        for (float v : layer.values) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    CHECK(scene.truth.at("onset_date") == "2018-02-10");

    // low layers average near pre_mean, high cells near post_mean
    double low = 0.0;
    for (float v : scene.stack.layers[0].values) low += v;
    CHECK(std::abs(low / 576.0 - 0.25) < 0.03);

    double high = 0.0;
    std::size_t nh = 0;
    for (std::size_t p = 0; p < 576; ++p)
        if (scene.truth_mask.values[p] == 1.0f) {
            high += scene.stack.layers[5].values[p];
            ++nh;
        }
    REQUIRE(nh == scene.truth.at("footprint_pixel_count").get<std::size_t>());
    CHECK(std::abs(high / static_cast<double>(nh) - 0.8) < 0.03);

    SUBCASE("low-mode sample mean at 512x512 sits within 0.03 of the stated mean") {
        CoherenceSceneSpec big = spec;
        big.grid = grid10m(512, 512);
        big.dates = {Date{2018, 1, 5}, Date{2018, 1, 17}};
        big.onset_index = 5; // never flips
        const auto s = gen_coherence_stack(big);
        double m = 0.0;
        for (float v : s.stack.layers[0].values) m += v;
        CHECK(std::abs(m / (512.0 * 512.0) - 0.25) < 0.03);
    }
    SUBCASE("onset beyond the last pair leaves the whole stack low") {
        CoherenceSceneSpec late = spec;
        late.onset_index = 10;
        const auto s = gen_coherence_stack(late);
        CHECK(s.truth.at("onset_date").is_null());
        for (const auto& layer : s.stack.layers) {
            double m = 0.0;
            for (float v : layer.values) m += v;
            CHECK(m / 576.0 < 0.35);
        }
    }
    SUBCASE("whole-grid footprint with onset 0 is all high") {
        CoherenceSceneSpec all = spec;
        all.footprint = rect(-5.0, 5.0, 245.0, -245.0);
        all.onset_index = 0;
        const auto s = gen_coherence_stack(all);
        for (const auto& layer : s.stack.layers) {
            double m = 0.0;
            for (float v : layer.values) m += v;
            CHECK(m / 576.0 > 0.7);
        }
    }
}

TEST_CASE("spec JSON parsing round trip") {
    const nlohmann::json j = {
        {"bbox", {92.1, 20.6, 92.7, 21.3}},
        {"start_date", "2012-01-01"},
        {"end_date", "2017-12-31"},
        {"base_rate", 5.0},
        {"peak_rate", 9.0},
        {"quiet_start", "06-15"},
        {"quiet_end", "09-30"},
        {"agri_centers", {{92.25, 20.75}}},
        {"sigma_agri_m", 2500.0},
        {"seed", 31},
        {"anomaly",
         {{"start_date", "2015-08-25"},
          {"end_date", "2015-10-31"},
          {"expected_total", 167},
          {"centers", {{92.35, 21.05}}},
          {"sigma_m", 1200.0}}},
    };
    const auto spec = parse_fire_scene_spec(j, ".");
    CHECK(spec.quiet_start == MonthDay{6, 15});
    CHECK(spec.anomaly->expected_total == 167.0);
    CHECK(spec.seed == 31);

    const nlohmann::json sar = {
        {"grid", {{"x0", 0.0}, {"y0", 0.0}, {"dx", 10.0}, {"dy", -10.0}, {"width", 32}, {"height", 32}}},
        {"dates", {{"start", "2017-01-01"}, {"step_days", 12}, {"count", 10}}},
        {"mu_pre", 0.25},
        {"drop_db", -3.0},
        {"change_date", "2017-03-01"},
        {"footprint", {{50.0, -50.0}, {150.0, -50.0}, {150.0, -150.0}, {50.0, -150.0}}},
        {"enl", 4.0},
        {"seed", 77},
    };
    const auto sspec = parse_sar_scene_spec(sar);
    CHECK(sspec.dates.size() == 10);
    CHECK(sspec.dates[9] == Date{2017, 1, 1}.plus_days(108));

    CHECK_THROWS_AS(parse_sar_scene_spec(nlohmann::json{{"grid", "nope"}}), ValidationError);
}
