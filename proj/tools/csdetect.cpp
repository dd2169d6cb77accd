// csdetect: conflict-signature detection in remote-sensing time series.
// Subcommands cover fire-catalog analytics (daily counts, seasonal anomaly
// z-scores, KDE), raster statistics (mutual information), SAR change
// detection (log-ratio, coherence events), and the synthetic-scene simulator
// used to verify all of it.

#include "csd/coherence_watch.hpp"
#include "csd/error.hpp"
#include "csd/fire_analysis.hpp"
#include "csd/firms.hpp"
#include "csd/geodata.hpp"
#include "csd/sar_change.hpp"
#include "csd/spatial_stats.hpp"
#include "csd/synthgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool g_progress = false;
bool g_debug = std::getenv("CSDETECT_LOG") && std::string(std::getenv("CSDETECT_LOG")) == "debug";

void progress(const std::string& msg) {
    if (g_progress) std::cout << msg << "\n";
    else if (g_debug) std::cerr << "[csdetect] " << msg << "\n";
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json input_digests(const std::vector<std::string>& paths) {
    json out = json::object();
    for (const auto& p : paths) out[p] = {{"fnv1a64", hex64(csd::fnv1a64_file(p))}};
    return out;
}

void write_json(const std::string& path, const json& j) {
    csd::write_text_file(path, j.dump(2) + "\n");
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// JSON config files for CLI11: an object keyed by subcommand, each holding
// long-option values, e.g. {"fires-anomaly": {"mode": "fixed"}}. Values given
// on the command line win. The --config flag lives on the root app, so it
// goes before the subcommand name.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void walk(const json& obj, const std::vector<std::string>& parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto deeper = parents;
                deeper.push_back(key);
                walk(value, deeper, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& e : value) item.inputs.push_back(scalar(e));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

// ---- shared fire-catalog ingestion options -------------------------------

struct FireInputArgs {
    std::string csv_path;
    std::vector<double> bbox; // lon_min, lat_min, lon_max, lat_max
    double min_confidence = -1.0;
    std::string instrument;
    bool strict = false;

    csd::ParseOptions options() const {
        csd::ParseOptions o;
        if (!bbox.empty()) {
            if (bbox.size() != 4) throw csd::ValidationError("--bbox needs lon_min,lat_min,lon_max,lat_max");
            o.bbox = csd::BBox{bbox[0], bbox[1], bbox[2], bbox[3]};
            o.bbox->validate();
        }
        if (min_confidence >= 0.0) o.min_confidence = min_confidence;
        if (!instrument.empty()) o.instrument = instrument;
        o.mode = strict ? csd::ParseMode::strict : csd::ParseMode::lenient;
        return o;
    }

    json echo() const {
        json j;
        j["csv"] = csv_path;
        j["bbox"] = bbox.empty() ? json(nullptr) : json(bbox);
        j["min_confidence"] = min_confidence >= 0.0 ? json(min_confidence) : json(nullptr);
        j["instrument"] = instrument.empty() ? json(nullptr) : json(instrument);
        j["mode"] = strict ? "strict" : "lenient";
        return j;
    }
};

void add_fire_input_options(CLI::App* cmd, FireInputArgs& args) {
    cmd->add_option("--csv", args.csv_path, "FIRMS-format fire catalog CSV")->required();
    cmd->add_option("--bbox", args.bbox, "lon_min,lat_min,lon_max,lat_max filter (inclusive)")
        ->delimiter(',')
        ->expected(4);
    cmd->add_option("--min-confidence", args.min_confidence, "confidence threshold 0-100");
    cmd->add_option("--instrument", args.instrument, "keep only this instrument (e.g. MODIS)");
    cmd->add_flag("--strict", args.strict, "fail on the first malformed row instead of skipping");
}

csd::ParseResult load_detections(const FireInputArgs& args) {
    const auto res = csd::parse_firms_csv(args.csv_path, args.options());
    progress("parsed " + std::to_string(res.total_rows) + " rows, kept " +
             std::to_string(res.detections.size()));
    return res;
}

csd::Date parse_cli_date(const std::string& s, const char* flag) {
    return csd::parse_date_or_throw(s, flag);
}

// ---- fires-counts ----------------------------------------------------------

struct FiresCountsArgs {
    FireInputArgs input;
    std::string start, end, out;
};

void run_fires_counts(const FiresCountsArgs& a) {
    const auto res = load_detections(a.input);
    const csd::Date start = parse_cli_date(a.start, "--start");
    const csd::Date end = parse_cli_date(a.end, "--end");
    const auto series = csd::daily_counts(res.detections, start, end);

    std::string csv = "date,count\n";
    for (std::size_t i = 0; i < series.counts.size(); ++i)
        csv += series.start_date.plus_days(static_cast<std::int64_t>(i)).to_string() + "," +
               std::to_string(series.counts[i]) + "\n";
    ensure_parent_dir(a.out);
    csd::write_text_file(a.out, csv);

    json summary;
    summary["command"] = "fires-counts";
    summary["params"] = a.input.echo();
    summary["params"]["start"] = a.start;
    summary["params"]["end"] = a.end;
    summary["rows"] = {{"total", res.total_rows},
                       {"kept", res.detections.size()},
                       {"skipped_malformed", res.skipped_malformed},
                       {"skipped_filtered", res.skipped_filtered}};
    summary["inputs"] = input_digests({a.input.csv_path});
    write_json(a.out + ".summary.json", summary);
}

// ---- fires-compare ---------------------------------------------------------

struct FiresCompareArgs {
    FireInputArgs input;
    int year_a = 0, year_b = 0;
    int season_start_month = 6;
    std::string start, end, out;
};

void run_fires_compare(const FiresCompareArgs& a) {
    const auto res = load_detections(a.input);
    // The series must cover both season-years through the following February.
    const csd::Date start = a.start.empty() ? csd::Date{std::min(a.year_a, a.year_b), 1, 1}
                                            : parse_cli_date(a.start, "--start");
    const csd::Date end = a.end.empty() ? csd::Date{std::max(a.year_a, a.year_b) + 1, 12, 31}
                                        : parse_cli_date(a.end, "--end");
    const auto series = csd::daily_counts(res.detections, start, end);
    const auto rows = csd::export_daily_comparison(series, a.year_a, a.year_b, a.season_start_month);

    std::string csv = "offset,count_a,count_b\n";
    for (const auto& r : rows)
        csv += std::to_string(r.offset) + "," + std::to_string(r.count_a) + "," +
               std::to_string(r.count_b) + "\n";
    ensure_parent_dir(a.out);
    csd::write_text_file(a.out, csv);

    json summary;
    summary["command"] = "fires-compare";
    summary["params"] = a.input.echo();
    summary["params"]["year_a"] = a.year_a;
    summary["params"]["year_b"] = a.year_b;
    summary["params"]["season_start_month"] = a.season_start_month;
    summary["inputs"] = input_digests({a.input.csv_path});
    write_json(a.out + ".summary.json", summary);
}

// ---- fires-anomaly ---------------------------------------------------------

struct FiresAnomalyArgs {
    FireInputArgs input;
    std::string mode = "auto"; // fixed | auto
    std::vector<int> months;   // fixed mode: first,last (default 6,10)
    double z_threshold = 2.0;
    bool exclude_target = false;
    int min_gap_days = 14;
    int smooth_window = 7;
    std::string start, end, out;
};

void run_fires_anomaly(const FiresAnomalyArgs& a) {
    const auto res = load_detections(a.input);
    csd::Date start, end;
    if (!a.start.empty() && !a.end.empty()) {
        start = parse_cli_date(a.start, "--start");
        end = parse_cli_date(a.end, "--end");
    } else {
        if (res.detections.empty())
            throw csd::ValidationError("fires-anomaly: empty catalog; pass --start/--end explicitly");
        csd::Date lo = res.detections.front().acq_date, hi = lo;
        for (const auto& d : res.detections) {
            lo = std::min(lo, d.acq_date);
            hi = std::max(hi, d.acq_date);
        }
        start = csd::Date{lo.year, 1, 1};
        end = csd::Date{hi.year, 12, 31};
    }
    const auto series = csd::daily_counts(res.detections, start, end);

    csd::OffSeasonWindows windows;
    json consensus_echo(nullptr);
    if (a.mode == "fixed") {
        const int first = a.months.empty() ? 6 : a.months.at(0);
        const int last = a.months.empty() ? 10 : a.months.at(1);
        windows = csd::fixed_off_season_windows(series, first, last);
    } else if (a.mode == "auto") {
        const auto detected = csd::detect_off_season(series, a.min_gap_days, a.smooth_window);
        const auto consensus = csd::consensus_off_season(detected);
        windows = csd::apply_window_to_years(series, consensus.start, consensus.end,
                                             csd::SeasonMode::automatic);
        json per_year = json::object();
        for (const auto& [year, w] : detected.per_year)
            per_year[std::to_string(year)] = {{"first_day", w.first_day.to_string()},
                                              {"last_day", w.last_day.to_string()},
                                              {"fallback", w.fallback}};
        consensus_echo = {{"start", {consensus.start.month, consensus.start.day}},
                          {"end", {consensus.end.month, consensus.end.day}},
                          {"from_fallback", consensus.from_fallback},
                          {"per_year_detected", std::move(per_year)}};
    } else {
        throw csd::ValidationError("fires-anomaly: --mode must be fixed or auto");
    }

    const auto counts = csd::off_season_counts(series, windows);
    std::map<int, double> yearly;
    for (const auto& [year, c] : counts) yearly[year] = static_cast<double>(c);
    csd::AnomalyParams params;
    params.z_threshold = a.z_threshold;
    params.include_target = !a.exclude_target;
    const auto report = csd::anomaly_zscores(yearly, params);

    json years = json::array();
    for (const auto& row : report.years)
        years.push_back({{"year", row.year}, {"count", row.count}, {"z", row.z}, {"flagged", row.flagged}});
    json out;
    out["years"] = std::move(years);
    out["mean"] = report.mean;
    out["std"] = report.stddev;
    out["params"] = a.input.echo();
    out["params"]["mode"] = a.mode;
    out["params"]["z_threshold"] = a.z_threshold;
    out["params"]["include_target"] = !a.exclude_target;
    out["params"]["min_gap_days"] = a.min_gap_days;
    out["params"]["smooth_window"] = a.smooth_window;
    out["params"]["months"] = a.months.empty() ? json::array({6, 10}) : json(a.months);
    out["params"]["start"] = start.to_string();
    out["params"]["end"] = end.to_string();
    out["season"] = json::object();
    out["season"]["mode"] = a.mode;
    out["season"]["consensus"] = consensus_echo;
    {
        json windows_echo = json::object();
        for (const auto& [year, w] : windows.per_year)
            windows_echo[std::to_string(year)] = {{"first_day", w.first_day.to_string()},
                                                  {"last_day", w.last_day.to_string()}};
        out["season"]["windows"] = std::move(windows_echo);
    }
    out["inputs"] = input_digests({a.input.csv_path});
    ensure_parent_dir(a.out);
    write_json(a.out, out);
}

// ---- fires-kde -------------------------------------------------------------

struct FiresKdeArgs {
    FireInputArgs input;
    std::string start, end;
    std::vector<double> origin;    // lon,lat
    std::vector<double> bandwidth; // hx,hy meters
    double cell = 0.0;             // 0 = auto
    double pad_bw = 3.0;
    std::vector<double> grid;      // x0,y0,dx,dy,width,height (local meters)
    std::string out;
};

void run_fires_kde(const FiresKdeArgs& a) {
    const auto res = load_detections(a.input);
    std::vector<csd::FireDetection> dets = res.detections;
    if (!a.start.empty() || !a.end.empty()) {
        if (a.start.empty() || a.end.empty())
            throw csd::ValidationError("fires-kde: pass both --start and --end or neither");
        dets = csd::filter_by_dates(dets, parse_cli_date(a.start, "--start"),
                                    parse_cli_date(a.end, "--end"));
    }
    if (dets.empty()) throw csd::ValidationError("fires-kde: no detections after filtering");

    std::optional<csd::LonLat> origin;
    if (!a.origin.empty()) {
        if (a.origin.size() != 2) throw csd::ValidationError("--origin needs lon,lat");
        origin = csd::LonLat{a.origin[0], a.origin[1]};
    }
    const auto ps = csd::project_local(dets, origin);

    std::optional<csd::Bandwidth> bw;
    if (!a.bandwidth.empty()) {
        if (a.bandwidth.size() != 2) throw csd::ValidationError("--bandwidth needs hx,hy");
        bw = csd::Bandwidth{a.bandwidth[0], a.bandwidth[1]};
    }
    const csd::Bandwidth used = bw ? *bw : csd::scott_bandwidth(ps);

    char crs[96];
    std::snprintf(crs, sizeof(crs), "LOCAL-EQRECT:%.9f,%.9f", ps.origin.lon, ps.origin.lat);
    csd::GridSpec grid;
    if (!a.grid.empty()) {
        if (a.grid.size() != 6) throw csd::ValidationError("--grid needs x0,y0,dx,dy,width,height");
        grid.x0 = a.grid[0];
        grid.y0 = a.grid[1];
        grid.dx = a.grid[2];
        grid.dy = a.grid[3];
        grid.width = static_cast<int>(a.grid[4]);
        grid.height = static_cast<int>(a.grid[5]);
        grid.crs = crs;
        grid.validate();
    } else {
        const double cell = a.cell > 0.0 ? a.cell : std::max(1.0, std::min(used.hx, used.hy) / 2.0);
        grid = csd::kde_grid_for(ps, used, cell, a.pad_bw, crs);
    }
    progress("kde grid " + std::to_string(grid.width) + "x" + std::to_string(grid.height) + " on " +
             std::to_string(ps.n()) + " points");

    const auto density = csd::kde2d(ps, grid, used);
    ensure_parent_dir(a.out);
    csd::write_raster(density.raster, a.out);

    json summary;
    summary["command"] = "fires-kde";
    summary["params"] = a.input.echo();
    summary["params"]["start"] = a.start.empty() ? json(nullptr) : json(a.start);
    summary["params"]["end"] = a.end.empty() ? json(nullptr) : json(a.end);
    summary["params"]["origin"] = {ps.origin.lon, ps.origin.lat};
    summary["params"]["bandwidth_m"] = {used.hx, used.hy};
    summary["params"]["bandwidth_mode"] = bw ? "explicit" : "scott";
    summary["params"]["pad_bandwidths"] = a.pad_bw;
    summary["grid"] = {{"x0", grid.x0},        {"y0", grid.y0},       {"dx", grid.dx},
                       {"dy", grid.dy},        {"width", grid.width}, {"height", grid.height},
                       {"crs", grid.crs}};
    summary["points"] = ps.n();
    summary["inputs"] = input_digests({a.input.csv_path});
    write_json(a.out + ".summary.json", summary);
}

// ---- stats-mi --------------------------------------------------------------

struct StatsMiArgs {
    std::string a, b, out;
    int bins = 32;
};

void run_stats_mi(const StatsMiArgs& args) {
    const csd::Raster ra = csd::read_raster(args.a);
    const csd::Raster rb = csd::read_raster(args.b);
    const auto res = csd::mutual_information(ra, rb, args.bins);

    json out;
    out["mi_nats"] = res.mi_nats;
    out["bins"] = args.bins;
    out["entropy_a"] = res.entropy_a;
    out["entropy_b"] = res.entropy_b;
    out["params"] = {{"a", args.a}, {"b", args.b}, {"bins", args.bins}};
    out["inputs"] = input_digests({csd::raster_base_path(args.a) + ".json",
                                   csd::raster_base_path(args.a) + ".bin",
                                   csd::raster_base_path(args.b) + ".json",
                                   csd::raster_base_path(args.b) + ".bin"});
    ensure_parent_dir(args.out);
    write_json(args.out, out);
}

// ---- sar-logratio ----------------------------------------------------------

struct SarLogratioArgs {
    std::string manifest, ref_start, ref_end, out_dir;
    double threshold = 0.4;
    std::string direction = "decrease";
    std::string scale = "linear";
    int min_area_px = 10;
    int stat_window = 5;
    bool write_window_masks = true;
};

void run_sar_logratio(const SarLogratioArgs& a) {
    csd::ChangeParams params;
    params.threshold = a.threshold;
    params.min_area_px = a.min_area_px;
    params.stat_window_px = a.stat_window;
    params.ref_start = parse_cli_date(a.ref_start, "--ref-start");
    params.ref_end = parse_cli_date(a.ref_end, "--ref-end");
    if (a.direction == "decrease") params.direction = csd::ChangeDirection::decrease;
    else if (a.direction == "increase") params.direction = csd::ChangeDirection::increase;
    else if (a.direction == "both") params.direction = csd::ChangeDirection::both;
    else throw csd::ValidationError("--direction must be decrease, increase or both");
    if (a.scale == "linear") params.input_scale = csd::InputScale::linear;
    else if (a.scale == "db") params.input_scale = csd::InputScale::db;
    else throw csd::ValidationError("--scale must be linear or db");
    params.validate();

    const csd::RasterStack stack = csd::read_stack(a.manifest);
    progress("loaded " + std::to_string(stack.size()) + " layers");
    const auto result = csd::run_change_detection(stack, params);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    csd::write_raster(result.reference, (dir / "reference").string());
    csd::write_raster(result.cumulative_mask, (dir / "cumulative_mask").string());
    if (a.write_window_masks) {
        for (const auto& map : result.maps)
            csd::write_raster(map.to_raster(), (dir / ("chg_" + map.window_end.to_string())).string());
    }

    std::string csv = "window_end_date,new_area_m2,cumulative_area_m2\n";
    for (const auto& row : result.series.rows)
        csv += row.window_end.to_string() + "," + fmt_double(row.new_area_m2) + "," +
               fmt_double(row.cum_area_m2) + "\n";
    csd::write_text_file((dir / "series.csv").string(), csv);

    json summary;
    summary["command"] = "sar-logratio";
    summary["first_detection_date"] = result.series.first_detection_date
                                          ? json(result.series.first_detection_date->to_string())
                                          : json(nullptr);
    summary["total_area_m2"] = result.series.total_area_m2;
    summary["windows"] = result.series.rows.size();
    summary["params"] = {{"manifest", a.manifest},
                         {"ref_start", a.ref_start},
                         {"ref_end", a.ref_end},
                         {"threshold", a.threshold},
                         {"direction", a.direction},
                         {"input_scale", a.scale},
                         {"min_area_px", a.min_area_px},
                         {"stat_window_px", a.stat_window}};
    summary["inputs"] = input_digests({a.manifest});
    write_json((dir / "summary.json").string(), summary);
}

// ---- sar-coherence ---------------------------------------------------------

struct SarCoherenceArgs {
    std::string manifest, out_dir;
    double tau_low = 0.35;
    double tau_high = 0.6;
    int persistence = 2;
    int baseline_n = 6;
    int min_size_px = 5;
};

void run_sar_coherence(const SarCoherenceArgs& a) {
    csd::EventParams params;
    params.tau_low = a.tau_low;
    params.tau_high = a.tau_high;
    params.persistence_k = a.persistence;
    params.baseline_n = a.baseline_n;
    params.validate();

    const auto stack = csd::CoherenceStack::from(csd::read_stack(a.manifest));
    progress("loaded " + std::to_string(stack.size()) + " coherence layers");
    const auto events = csd::detect_low_to_high(stack, params);
    const json features = csd::events_to_components(events, a.min_size_px);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    csd::write_raster(events.to_date_raster(), (dir / "event_dates").string());
    csd::write_text_file((dir / "events.geojson").string(), features.dump(2) + "\n");

    json summary;
    summary["command"] = "sar-coherence";
    summary["event_pixels"] = events.event_count();
    summary["components"] = features.at("features").size();
    summary["params"] = {{"manifest", a.manifest},
                         {"tau_low", a.tau_low},
                         {"tau_high", a.tau_high},
                         {"persistence_k", a.persistence},
                         {"baseline_n", a.baseline_n},
                         {"min_size_px", a.min_size_px}};
    summary["inputs"] = input_digests({a.manifest});
    write_json((dir / "summary.json").string(), summary);
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string kind, spec_path, out_dir;
    std::int64_t seed = -1; // -1 = use the spec's seed
};

void write_stack_outputs(const csd::SyntheticStack& scene, const fs::path& dir) {
    json manifest = json::array();
    for (std::size_t i = 0; i < scene.stack.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "t%03zu_%s", i, scene.stack.timestamps[i].to_string().c_str());
        csd::write_raster(scene.stack.layers[i], (dir / name).string());
        manifest.push_back(
            {{"timestamp", scene.stack.timestamps[i].to_string()}, {"path", std::string(name) + ".json"}});
    }
    write_json((dir / "manifest.json").string(), manifest);
    csd::write_raster(scene.truth_mask, (dir / "truth_mask").string());
    write_json((dir / "truth.json").string(), scene.truth);
}

void run_simulate(const SimulateArgs& a) {
    json spec;
    try {
        spec = json::parse(csd::read_text_file(a.spec_path));
    } catch (const json::exception& e) {
        throw csd::ValidationError("simulate: spec is not valid JSON: " + std::string(e.what()));
    }
    if (spec.contains("kind") && spec.at("kind") != a.kind)
        throw csd::ValidationError("simulate: spec kind '" + spec.at("kind").get<std::string>() +
                                   "' does not match --kind " + a.kind);
    if (a.seed >= 0) spec["seed"] = static_cast<std::uint64_t>(a.seed);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    const std::string base_dir = fs::path(a.spec_path).parent_path().string();

    if (a.kind == "fires") {
        const auto scene_spec = csd::parse_fire_scene_spec(spec, base_dir.empty() ? "." : base_dir);
        const auto catalog = csd::gen_fire_catalog(scene_spec);
        csd::write_text_file((dir / "fires.csv").string(), catalog.csv);
        write_json((dir / "truth.json").string(), catalog.truth);
    } else if (a.kind == "settlements") {
        const int n = spec.at("n").get<int>();
        const auto& b = spec.at("bbox");
        const csd::BBox bbox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                             b[3].get<double>()};
        const auto out = csd::gen_settlements(n, bbox, spec.value("seed", std::uint64_t{0}));
        csd::write_text_file((dir / "settlements.geojson").string(), out.geojson.dump(2) + "\n");
        write_json((dir / "truth.json").string(),
                   json{{"kind", "settlements"}, {"n", n}, {"seed", spec.value("seed", std::uint64_t{0})}});
    } else if (a.kind == "backscatter") {
        write_stack_outputs(csd::gen_backscatter_stack(csd::parse_sar_scene_spec(spec)), dir);
    } else if (a.kind == "coherence") {
        write_stack_outputs(csd::gen_coherence_stack(csd::parse_coherence_scene_spec(spec)), dir);
    } else {
        throw csd::ValidationError("simulate: kind must be fires, settlements, backscatter or coherence");
    }

    json summary;
    summary["command"] = "simulate";
    summary["params"] = {{"kind", a.kind},
                         {"spec", a.spec_path},
                         {"seed_override", a.seed >= 0 ? json(a.seed) : json(nullptr)}};
    summary["inputs"] = input_digests({a.spec_path});
    write_json((dir / "run_summary.json").string(), summary);
}

// ---- quicklook -------------------------------------------------------------

struct QuicklookArgs {
    std::string raster, out;
};

void run_quicklook(const QuicklookArgs& a) {
    ensure_parent_dir(a.out);
    csd::quicklook(csd::read_raster(a.raster), a.out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"csdetect: conflict signatures in remote-sensing time series"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file, keyed by subcommand; flags win");
    app.add_flag("--progress", g_progress, "print progress lines to stdout");

    FiresCountsArgs counts_args;
    auto* counts = app.add_subcommand("fires-counts", "daily fire-count series as CSV");
    add_fire_input_options(counts, counts_args.input);
    counts->add_option("--start", counts_args.start, "first day, YYYY-MM-DD")->required();
    counts->add_option("--end", counts_args.end, "last day, YYYY-MM-DD")->required();
    counts->add_option("--out", counts_args.out, "output CSV path")->required();
    counts->callback([&] { run_fires_counts(counts_args); });

    FiresCompareArgs compare_args;
    auto* compare = app.add_subcommand("fires-compare", "day-aligned season comparison of two years");
    add_fire_input_options(compare, compare_args.input);
    compare->add_option("--year-a", compare_args.year_a, "first season-year")->required();
    compare->add_option("--year-b", compare_args.year_b, "second season-year")->required();
    compare->add_option("--season-start-month", compare_args.season_start_month,
                        "season start month (default June)");
    compare->add_option("--start", compare_args.start, "series start override (YYYY-MM-DD)");
    compare->add_option("--end", compare_args.end, "series end override (YYYY-MM-DD)");
    compare->add_option("--out", compare_args.out, "output CSV path")->required();
    compare->callback([&] { run_fires_compare(compare_args); });

    FiresAnomalyArgs anomaly_args;
    auto* anomaly = app.add_subcommand("fires-anomaly", "yearly off-season anomaly z-scores");
    add_fire_input_options(anomaly, anomaly_args.input);
    anomaly->add_option("--mode", anomaly_args.mode, "fixed | auto (default auto)");
    anomaly->add_option("--months", anomaly_args.months, "fixed window months first,last (default 6,10)")
        ->delimiter(',')
        ->expected(2);
    anomaly->add_option("--z-threshold", anomaly_args.z_threshold, "flag years with z >= this");
    anomaly->add_flag("--exclude-target", anomaly_args.exclude_target,
                      "leave-one-out mean/std instead of the paper's include-all convention");
    anomaly->add_option("--min-gap-days", anomaly_args.min_gap_days, "auto mode: minimum quiet run");
    anomaly->add_option("--smooth-window", anomaly_args.smooth_window, "auto mode: odd moving-sum window");
    anomaly->add_option("--start", anomaly_args.start, "series start override");
    anomaly->add_option("--end", anomaly_args.end, "series end override");
    anomaly->add_option("--out", anomaly_args.out, "output JSON report path")->required();
    anomaly->callback([&] { run_fires_anomaly(anomaly_args); });

    FiresKdeArgs kde_args;
    auto* kde = app.add_subcommand("fires-kde", "kernel density raster of detection locations");
    add_fire_input_options(kde, kde_args.input);
    kde->add_option("--start", kde_args.start, "date filter start");
    kde->add_option("--end", kde_args.end, "date filter end");
    kde->add_option("--origin", kde_args.origin, "projection origin lon,lat (default centroid)")
        ->delimiter(',')
        ->expected(2);
    kde->add_option("--bandwidth", kde_args.bandwidth, "bandwidth hx,hy meters (default Scott)")
        ->delimiter(',')
        ->expected(2);
    kde->add_option("--cell", kde_args.cell, "cell size meters (default bandwidth/2)");
    kde->add_option("--pad-bw", kde_args.pad_bw, "auto-grid padding in bandwidths (default 3)");
    kde->add_option("--grid", kde_args.grid, "explicit grid x0,y0,dx,dy,width,height (local meters)")
        ->delimiter(',')
        ->expected(6);
    kde->add_option("--out", kde_args.out, "output raster base path")->required();
    kde->callback([&] { run_fires_kde(kde_args); });

    StatsMiArgs mi_args;
    auto* mi = app.add_subcommand("stats-mi", "mutual information between two co-registered rasters");
    mi->add_option("--a", mi_args.a, "first raster")->required();
    mi->add_option("--b", mi_args.b, "second raster")->required();
    mi->add_option("--bins", mi_args.bins, "histogram bins per raster (default 32)");
    mi->add_option("--out", mi_args.out, "output JSON path")->required();
    mi->callback([&] { run_stats_mi(mi_args); });

    SarLogratioArgs lr_args;
    auto* lr = app.add_subcommand("sar-logratio", "log-ratio change detection over a backscatter stack");
    lr->add_option("--manifest", lr_args.manifest, "stack manifest JSON")->required();
    lr->add_option("--ref-start", lr_args.ref_start, "reference range start (inclusive)")->required();
    lr->add_option("--ref-end", lr_args.ref_end, "reference range end (exclusive)")->required();
    lr->add_option("--threshold", lr_args.threshold, "log-ratio threshold (default 0.4, natural log)");
    lr->add_option("--direction", lr_args.direction, "decrease | increase | both (default decrease)");
    lr->add_option("--scale", lr_args.scale, "input scale: linear | db (default linear)");
    lr->add_option("--min-area-px", lr_args.min_area_px, "new-change pixel gate for the first detection");
    lr->add_option("--stat-window", lr_args.stat_window,
                   "odd pixel window for averaging the statistic (1 = per-pixel, default 5)");
    lr->add_flag("!--no-window-masks", lr_args.write_window_masks, "skip per-window mask rasters");
    lr->add_option("--out-dir", lr_args.out_dir, "output directory")->required();
    lr->callback([&] { run_sar_logratio(lr_args); });

    SarCoherenceArgs coh_args;
    auto* coh = app.add_subcommand("sar-coherence", "low-to-high coherence event detection");
    coh->add_option("--manifest", coh_args.manifest, "coherence stack manifest JSON")->required();
    coh->add_option("--tau-low", coh_args.tau_low, "baseline must be below this (default 0.35)");
    coh->add_option("--tau-high", coh_args.tau_high, "event level (default 0.6)");
    coh->add_option("--persistence", coh_args.persistence, "consecutive high layers required (default 2)");
    coh->add_option("--baseline-n", coh_args.baseline_n, "layers in the pre-event baseline (default 6)");
    coh->add_option("--min-size-px", coh_args.min_size_px, "component size gate for GeoJSON (default 5)");
    coh->add_option("--out-dir", coh_args.out_dir, "output directory")->required();
    coh->callback([&] { run_sar_coherence(coh_args); });

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic scene with ground truth");
    sim->add_option("--kind", sim_args.kind, "fires | settlements | backscatter | coherence")->required();
    sim->add_option("--spec", sim_args.spec_path, "scene spec JSON")->required();
    sim->add_option("--seed", sim_args.seed, "override the spec seed");
    sim->add_option("--out-dir", sim_args.out_dir, "output directory")->required();
    sim->callback([&] { run_simulate(sim_args); });

    QuicklookArgs ql_args;
    auto* ql = app.add_subcommand("quicklook", "8-bit PGM quicklook of a raster");
    ql->add_option("--raster", ql_args.raster, "input raster")->required();
    ql->add_option("--out", ql_args.out, "output PGM path")->required();
    ql->callback([&] { run_quicklook(ql_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const csd::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
