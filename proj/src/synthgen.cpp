#include "csd/synthgen.hpp"

#include "csd/error.hpp"
#include "csd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

using nlohmann::json;

namespace csd {

namespace {

MonthDay month_day_of(Date d) {
    return MonthDay{d.month, d.day};
}

bool in_month_day_window(Date d, MonthDay lo, MonthDay hi) {
    const MonthDay md = month_day_of(d);
    return !(md < lo) && !(hi < md);
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void FireSceneSpec::validate() const {
    bbox.validate();
    if (end_date < start_date) throw ValidationError("fire scene: end_date before start_date");
    if (base_rate < 0.0 || peak_rate < 0.0) throw ValidationError("fire scene: rates must be >= 0");
    if (peak_doy < 1 || peak_doy > 366) throw ValidationError("fire scene: peak_doy out of range");
    if (quiet_end < quiet_start) throw ValidationError("fire scene: quiet window inverted");
    if (agri_centers.empty() && (base_rate > 0.0 || peak_rate > 0.0))
        throw ValidationError("fire scene: agricultural rate needs agri_centers");
    if (!(sigma_agri_m > 0.0)) throw ValidationError("fire scene: sigma_agri_m must be > 0");
    if (anomaly) {
        if (anomaly->end_date < anomaly->start_date)
            throw ValidationError("fire scene: anomaly window inverted");
        if (anomaly->start_date < start_date || end_date < anomaly->end_date)
            throw ValidationError("fire scene: anomaly window outside scene span");
        if (anomaly->expected_total < 0.0)
            throw ValidationError("fire scene: anomaly expected_total must be >= 0");
        if (anomaly->centers.empty() && anomaly->expected_total > 0.0)
            throw ValidationError("fire scene: anomaly needs centers");
        if (!(anomaly->sigma_m > 0.0)) throw ValidationError("fire scene: anomaly sigma_m must be > 0");
    }
}

double FireSceneSpec::daily_rate(Date d) const {
    if (in_month_day_window(d, quiet_start, quiet_end)) return 0.0;
    const double doy = static_cast<double>(d.to_days() - Date{d.year, 1, 1}.to_days()) + 1.0;
    const double phase = 2.0 * std::numbers::pi * (doy - peak_doy) / 365.25;
    const double bump = 0.5 * (1.0 + std::cos(phase));
    return base_rate + peak_rate * bump;
}

FireCatalog gen_fire_catalog(const FireSceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    const double to_deg = 180.0 / std::numbers::pi;
    auto scatter = [&](const LonLat& center, double sigma_m) {
        const double dx = rng.normal(0.0, sigma_m);
        const double dy = rng.normal(0.0, sigma_m);
        LonLat p;
        p.lat = center.lat + dy / kEarthRadiusM * to_deg;
        p.lon = center.lon + dx / (kEarthRadiusM * std::cos(center.lat / to_deg)) * to_deg;
        return p;
    };

    std::string csv = "latitude,longitude,acq_date,acq_time,confidence,instrument\n";
    json daily_agri = json::object();
    json daily_anom = json::object();
    json row_class = json::array();
    json row_in_bbox = json::array();
    std::int64_t n_agri = 0, n_anom = 0, n_in_bbox = 0, n_anom_in_window = 0;

    const double anom_days =
        spec.anomaly ? static_cast<double>(spec.anomaly->end_date.to_days() -
                                           spec.anomaly->start_date.to_days() + 1)
                     : 0.0;

    auto emit = [&](Date day, const LonLat& center, double sigma, bool anomalous) {
        const LonLat p = scatter(center, sigma);
        const int minutes = rng.uniform_int(0, 1439);
        const bool modis = rng.uniform() < 0.5;
        std::string confidence;
        if (modis) {
            confidence = std::to_string(rng.uniform_int(30, 100));
        } else {
            confidence = std::string(1, "lnh"[rng.uniform_int(0, 2)]);
        }
        char timebuf[16];
        std::snprintf(timebuf, sizeof(timebuf), "%02d%02d", minutes / 60, minutes % 60);
        csv += format_coord(p.lat) + "," + format_coord(p.lon) + "," + day.to_string() + "," + timebuf +
               "," + confidence + "," + (modis ? "MODIS" : "VIIRS") + "\n";
        row_class.push_back(anomalous ? 1 : 0);
        const bool inside = spec.bbox.contains(p.lon, p.lat);
        row_in_bbox.push_back(inside);
        if (inside) ++n_in_bbox;
    };

    for (std::int64_t di = spec.start_date.to_days(); di <= spec.end_date.to_days(); ++di) {
        const Date day = Date::from_days(di);
        const std::int64_t k_agri = rng.poisson(spec.daily_rate(day));
        if (k_agri > 0) {
            daily_agri[day.to_string()] = k_agri;
            n_agri += k_agri;
            for (std::int64_t i = 0; i < k_agri; ++i) {
                const auto& c = spec.agri_centers[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<int>(spec.agri_centers.size()) - 1))];
                emit(day, c, spec.sigma_agri_m, false);
            }
        }
        if (spec.anomaly && !(day < spec.anomaly->start_date) && !(spec.anomaly->end_date < day)) {
            const std::int64_t k_anom = rng.poisson(spec.anomaly->expected_total / anom_days);
            if (k_anom > 0) {
                daily_anom[day.to_string()] = k_anom;
                n_anom += k_anom;
                n_anom_in_window += k_anom;
                for (std::int64_t i = 0; i < k_anom; ++i) {
                    const auto& c = spec.anomaly->centers[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<int>(spec.anomaly->centers.size()) - 1))];
                    emit(day, c, spec.anomaly->sigma_m, true);
                }
            }
        }
    }

    FireCatalog out;
    out.csv = std::move(csv);
    out.truth = json{
        {"kind", "fires"},
        {"seed", spec.seed},
        {"bbox", {spec.bbox.lon_min, spec.bbox.lat_min, spec.bbox.lon_max, spec.bbox.lat_max}},
        {"start_date", spec.start_date.to_string()},
        {"end_date", spec.end_date.to_string()},
        {"quiet_start", json::array({spec.quiet_start.month, spec.quiet_start.day})},
        {"quiet_end", json::array({spec.quiet_end.month, spec.quiet_end.day})},
        {"n_total", n_agri + n_anom},
        {"n_agricultural", n_agri},
        {"n_anomalous", n_anom},
        {"n_in_bbox", n_in_bbox},
        {"daily_agricultural", std::move(daily_agri)},
        {"daily_anomalous", std::move(daily_anom)},
        {"per_event_class", std::move(row_class)},
        {"per_event_in_bbox", std::move(row_in_bbox)},
    };
    if (spec.anomaly) {
        out.truth["anomaly"] = json{
            {"start_date", spec.anomaly->start_date.to_string()},
            {"end_date", spec.anomaly->end_date.to_string()},
            {"expected_total", spec.anomaly->expected_total},
            {"actual_total", n_anom_in_window},
        };
    } else {
        out.truth["anomaly"] = nullptr;
    }
    return out;
}

SettlementSet gen_settlements(int n, const BBox& bbox, std::uint64_t seed) {
    if (n < 0) throw ValidationError("gen_settlements: n must be >= 0");
    bbox.validate();
    Rng rng(seed);
    SettlementSet out;
    json features = json::array();
    for (int i = 0; i < n; ++i) {
        LonLat p;
        p.lon = rng.uniform(bbox.lon_min, bbox.lon_max);
        p.lat = rng.uniform(bbox.lat_min, bbox.lat_max);
        out.points.push_back(p);
        features.push_back(json{
            {"type", "Feature"},
            {"geometry", {{"type", "Point"}, {"coordinates", {p.lon, p.lat}}}},
            {"properties", {{"id", i}}},
        });
    }
    out.geojson = json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
    return out;
}

std::vector<std::uint8_t> rasterize_polygon(const GridSpec& grid, const Polygon& poly) {
    std::vector<std::uint8_t> mask(grid.cell_count(), 0);
    if (poly.size() < 3) return mask;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const auto [x, y] = grid.cell_center(r, c);
            bool inside = false;
            for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
                const auto [xi, yi] = poly[i];
                const auto [xj, yj] = poly[j];
                if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
            }
            if (inside) mask[static_cast<std::size_t>(r) * grid.width + c] = 1;
        }
    }
    return mask;
}

void SarSceneSpec::validate() const {
    grid.validate();
    if (dates.size() < 2) throw ValidationError("sar scene: need at least 2 dates");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i])) throw ValidationError("sar scene: dates must be strictly increasing");
    if (!(mu_pre > 0.0)) throw ValidationError("sar scene: mu_pre must be > 0");
    if (!(enl >= 1.0)) throw ValidationError("sar scene: ENL must be >= 1");
    if (!footprint.empty()) {
        if (footprint.size() < 3) throw ValidationError("sar scene: footprint needs >= 3 vertices");
        if (change_date < dates.front() || dates.back() < change_date)
            throw ValidationError("sar scene: change_date outside the date span");
    }
}

namespace {

Raster mask_raster(const GridSpec& grid, const std::vector<std::uint8_t>& mask) {
    Raster r;
    r.grid = grid;
    r.values.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) r.values[i] = mask[i] ? 1.0f : 0.0f;
    return r;
}

} // namespace

SyntheticStack gen_backscatter_stack(const SarSceneSpec& spec) {
    spec.validate();
    const std::vector<std::uint8_t> mask = rasterize_polygon(spec.grid, spec.footprint);
    const double factor = std::pow(10.0, spec.drop_db / 10.0);
    const std::size_t n = spec.grid.cell_count();

    SyntheticStack out;
    out.stack.timestamps = spec.dates;
    out.stack.layers.reserve(spec.dates.size());
    std::int64_t first_post = -1;
    for (std::size_t li = 0; li < spec.dates.size(); ++li) {
        const bool post = !spec.footprint.empty() && !(spec.dates[li] < spec.change_date);
        if (post && first_post < 0) first_post = static_cast<std::int64_t>(li);
        Rng rng = Rng::substream(spec.seed, li);
        Raster layer;
        layer.grid = spec.grid;
        layer.timestamp = spec.dates[li];
        layer.values.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double mean = spec.mu_pre * ((post && mask[p]) ? factor : 1.0);
            layer.values[p] = static_cast<float>(mean * rng.gamma(spec.enl) / spec.enl);
        }
        out.stack.layers.push_back(std::move(layer));
    }

    std::size_t fp_count = 0;
    for (std::uint8_t m : mask) fp_count += m;
    out.truth_mask = mask_raster(spec.grid, mask);
    json dates = json::array();
    for (const Date& d : spec.dates) dates.push_back(d.to_string());
    out.truth = json{
        {"kind", "backscatter"},
        {"seed", spec.seed},
        {"mu_pre", spec.mu_pre},
        {"drop_db", spec.drop_db},
        {"enl", spec.enl},
        {"change_date", spec.footprint.empty() ? json(nullptr) : json(spec.change_date.to_string())},
        {"first_post_index", first_post},
        {"footprint_pixel_count", fp_count},
        {"footprint_area_m2", static_cast<double>(fp_count) * spec.grid.cell_area()},
        {"dates", std::move(dates)},
    };
    return out;
}

void CoherenceSceneSpec::validate() const {
    grid.validate();
    if (dates.size() < 2) throw ValidationError("coherence scene: need at least 2 dates");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i]))
            throw ValidationError("coherence scene: dates must be strictly increasing");
    if (!(pre_mean > 0.0 && pre_mean < 1.0 && post_mean > 0.0 && post_mean < 1.0))
        throw ValidationError("coherence scene: means must be in (0, 1)");
    if (!(concentration > 0.0)) throw ValidationError("coherence scene: concentration must be > 0");
    if (onset_index < 0) throw ValidationError("coherence scene: onset_index must be >= 0");
}

SyntheticStack gen_coherence_stack(const CoherenceSceneSpec& spec) {
    spec.validate();
    const std::vector<std::uint8_t> mask = rasterize_polygon(spec.grid, spec.footprint);
    const std::size_t n = spec.grid.cell_count();
    const double a_pre = spec.pre_mean * spec.concentration;
    const double b_pre = (1.0 - spec.pre_mean) * spec.concentration;
    const double a_post = spec.post_mean * spec.concentration;
    const double b_post = (1.0 - spec.post_mean) * spec.concentration;

    SyntheticStack out;
    out.stack.timestamps = spec.dates;
    out.stack.layers.reserve(spec.dates.size());
    for (std::size_t li = 0; li < spec.dates.size(); ++li) {
        const bool post = static_cast<int>(li) >= spec.onset_index;
        Rng rng = Rng::substream(spec.seed, li);
        Raster layer;
        layer.grid = spec.grid;
        layer.timestamp = spec.dates[li];
        layer.values.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            const bool high = post && mask[p];
            const double v = high ? rng.beta(a_post, b_post) : rng.beta(a_pre, b_pre);
            layer.values[p] = static_cast<float>(v);
        }
        out.stack.layers.push_back(std::move(layer));
    }

    std::size_t fp_count = 0;
    for (std::uint8_t m : mask) fp_count += m;
    out.truth_mask = mask_raster(spec.grid, mask);
    json dates = json::array();
    for (const Date& d : spec.dates) dates.push_back(d.to_string());
    out.truth = json{
        {"kind", "coherence"},
        {"seed", spec.seed},
        {"pre_mean", spec.pre_mean},
        {"post_mean", spec.post_mean},
        {"concentration", spec.concentration},
        {"onset_index", spec.onset_index},
        {"onset_date", spec.onset_index < static_cast<int>(spec.dates.size())
                           ? json(spec.dates[static_cast<std::size_t>(spec.onset_index)].to_string())
                           : json(nullptr)},
        {"footprint_pixel_count", fp_count},
        {"footprint_area_m2", static_cast<double>(fp_count) * spec.grid.cell_area()},
        {"dates", std::move(dates)},
    };
    return out;
}

// ---- spec-file parsing ----------------------------------------------------

namespace {

Date date_field(const json& j, const char* key) {
    return parse_date_or_throw(j.at(key).get<std::string>(), std::string("spec field ") + key);
}

MonthDay month_day_field(const json& j, const char* key) {
    // "MM-DD"
    const std::string s = j.at(key).get<std::string>();
    if (s.size() != 5 || s[2] != '-')
        throw ValidationError(std::string("spec field ") + key + ": expected MM-DD");
    const MonthDay md{std::stoi(s.substr(0, 2)), std::stoi(s.substr(3, 2))};
    if (md.month < 1 || md.month > 12 || md.day < 1 || md.day > 31)
        throw ValidationError(std::string("spec field ") + key + ": bad month-day");
    return md;
}

std::vector<LonLat> lonlat_list(const json& arr, const char* what) {
    std::vector<LonLat> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2)
            throw ValidationError(std::string(what) + ": expected [lon, lat] pairs");
        out.push_back(LonLat{item[0].get<double>(), item[1].get<double>()});
    }
    return out;
}

std::vector<Date> parse_dates(const json& j) {
    std::vector<Date> dates;
    const auto& d = j.at("dates");
    if (d.is_array()) {
        for (const auto& item : d) dates.push_back(parse_date_or_throw(item.get<std::string>(), "dates"));
    } else {
        const Date start = date_field(d, "start");
        const int step = d.at("step_days").get<int>();
        const int count = d.at("count").get<int>();
        if (step < 1 || count < 1) throw ValidationError("dates: step_days and count must be >= 1");
        for (int i = 0; i < count; ++i) dates.push_back(start.plus_days(static_cast<std::int64_t>(i) * step));
    }
    return dates;
}

Polygon parse_polygon(const json& j) {
    Polygon poly;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2) throw ValidationError("footprint: expected [x, y] pairs");
        poly.emplace_back(item[0].get<double>(), item[1].get<double>());
    }
    return poly;
}

BBox parse_bbox(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw ValidationError("bbox: expected [lon_min, lat_min, lon_max, lat_max]");
    BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    b.validate();
    return b;
}

} // namespace

GridSpec parse_grid_spec(const json& j) {
    GridSpec g;
    g.x0 = j.at("x0").get<double>();
    g.y0 = j.at("y0").get<double>();
    g.dx = j.at("dx").get<double>();
    g.dy = j.at("dy").get<double>();
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    if (j.contains("crs")) g.crs = j.at("crs").get<std::string>();
    g.validate();
    return g;
}

FireSceneSpec parse_fire_scene_spec(const json& j, const std::string& base_dir) {
    try {
        FireSceneSpec spec;
        spec.bbox = parse_bbox(j.at("bbox"));
        spec.start_date = date_field(j, "start_date");
        spec.end_date = date_field(j, "end_date");
        if (j.contains("base_rate")) spec.base_rate = j.at("base_rate").get<double>();
        if (j.contains("peak_rate")) spec.peak_rate = j.at("peak_rate").get<double>();
        if (j.contains("peak_doy")) spec.peak_doy = j.at("peak_doy").get<int>();
        if (j.contains("quiet_start")) spec.quiet_start = month_day_field(j, "quiet_start");
        if (j.contains("quiet_end")) spec.quiet_end = month_day_field(j, "quiet_end");
        spec.agri_centers = lonlat_list(j.at("agri_centers"), "agri_centers");
        if (j.contains("sigma_agri_m")) spec.sigma_agri_m = j.at("sigma_agri_m").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("anomaly") && !j.at("anomaly").is_null()) {
            const auto& a = j.at("anomaly");
            AnomalySpec an;
            an.start_date = date_field(a, "start_date");
            an.end_date = date_field(a, "end_date");
            an.expected_total = a.at("expected_total").get<double>();
            if (a.contains("sigma_m")) an.sigma_m = a.at("sigma_m").get<double>();
            if (a.contains("centers")) {
                an.centers = lonlat_list(a.at("centers"), "anomaly centers");
            } else if (a.contains("centers_path")) {
                std::string path = a.at("centers_path").get<std::string>();
                if (std::filesystem::path(path).is_relative())
                    path = (std::filesystem::path(base_dir) / path).string();
                const json gj = json::parse(read_text_file(path));
                for (const auto& f : gj.at("features")) {
                    const auto& coords = f.at("geometry").at("coordinates");
                    an.centers.push_back(LonLat{coords[0].get<double>(), coords[1].get<double>()});
                }
            } else {
                throw ValidationError("anomaly: need centers or centers_path");
            }
            spec.anomaly = std::move(an);
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("fire scene spec: ") + e.what());
    }
}

SarSceneSpec parse_sar_scene_spec(const json& j) {
    try {
        SarSceneSpec spec;
        spec.grid = parse_grid_spec(j.at("grid"));
        spec.dates = parse_dates(j);
        if (j.contains("mu_pre")) spec.mu_pre = j.at("mu_pre").get<double>();
        if (j.contains("drop_db")) spec.drop_db = j.at("drop_db").get<double>();
        if (j.contains("enl")) spec.enl = j.at("enl").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("footprint") && !j.at("footprint").is_null()) {
            spec.footprint = parse_polygon(j.at("footprint"));
            spec.change_date = date_field(j, "change_date");
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("sar scene spec: ") + e.what());
    }
}

CoherenceSceneSpec parse_coherence_scene_spec(const json& j) {
    try {
        CoherenceSceneSpec spec;
        spec.grid = parse_grid_spec(j.at("grid"));
        spec.dates = parse_dates(j);
        if (j.contains("pre_mean")) spec.pre_mean = j.at("pre_mean").get<double>();
        if (j.contains("post_mean")) spec.post_mean = j.at("post_mean").get<double>();
        if (j.contains("concentration")) spec.concentration = j.at("concentration").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("footprint") && !j.at("footprint").is_null())
            spec.footprint = parse_polygon(j.at("footprint"));
        spec.onset_index = j.at("onset_index").get<int>();
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("coherence scene spec: ") + e.what());
    }
}

} // namespace csd
