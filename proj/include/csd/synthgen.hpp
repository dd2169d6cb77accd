#pragma once

#include "csd/date.hpp"
#include "csd/fire_analysis.hpp"
#include "csd/firms.hpp"
#include "csd/geodata.hpp"
#include "csd/spatial_stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace csd {

// ---- fire catalogs -------------------------------------------------------

struct AnomalySpec {
    Date start_date;
    Date end_date;
    double expected_total = 0.0;  // Poisson-split uniformly over the window
    std::vector<LonLat> centers;  // settlement locations the burst scatters around
    double sigma_m = 1500.0;
};

struct FireSceneSpec {
    BBox bbox;
    Date start_date;
    Date end_date;
    double base_rate = 3.0;  // in-season floor, events/day
    double peak_rate = 9.0;  // seasonal amplitude on top of the floor
    int peak_doy = 32;       // day of year of the seasonal peak (~Feb 1)
    MonthDay quiet_start{6, 15}; // zero-rate window, inclusive
    MonthDay quiet_end{9, 30};
    std::vector<LonLat> agri_centers;
    double sigma_agri_m = 4000.0;
    std::optional<AnomalySpec> anomaly;
    std::uint64_t seed = 0;

    void validate() const;
    double daily_rate(Date d) const; // agricultural component only
};

struct FireCatalog {
    std::string csv;       // FIRMS-format, parses with zero skips
    nlohmann::json truth;  // per-day class counts, per-row labels, totals
};

FireCatalog gen_fire_catalog(const FireSceneSpec& spec);

struct SettlementSet {
    std::vector<LonLat> points;
    nlohmann::json geojson;
};

SettlementSet gen_settlements(int n, const BBox& bbox, std::uint64_t seed);

// ---- raster stacks -------------------------------------------------------

using Polygon = std::vector<std::pair<double, double>>; // world coords, implicit closure

struct SarSceneSpec {
    GridSpec grid;
    std::vector<Date> dates;
    double mu_pre = 0.12; // linear power
    double drop_db = -3.0;
    Date change_date;
    Polygon footprint; // empty = no-change scene
    double enl = 4.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CoherenceSceneSpec {
    GridSpec grid;
    std::vector<Date> dates; // later acquisition of each pair
    Polygon footprint;
    int onset_index = 0;     // pair index where the footprint flips high; >= size() = never
    double pre_mean = 0.25;
    double post_mean = 0.8;
    double concentration = 20.0; // beta concentration (alpha + beta)
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticStack {
    RasterStack stack;
    Raster truth_mask; // 1 inside footprint
    nlohmann::json truth;
};

// value = mean * Gamma(L)/L per pixel and date; mean drops by drop_db inside
// the footprint from change_date on. Layers draw from per-layer substreams.
SyntheticStack gen_backscatter_stack(const SarSceneSpec& spec);

// Beta draws with the pre mean everywhere, switching to the post mean inside
// the footprint from the onset pair on.
SyntheticStack gen_coherence_stack(const CoherenceSceneSpec& spec);

// Even-odd point-in-polygon test of each cell center.
std::vector<std::uint8_t> rasterize_polygon(const GridSpec& grid, const Polygon& poly);

// ---- spec-file parsing (used by the CLI `simulate` subcommand) -----------

// base_dir resolves relative paths inside the spec (e.g. anomaly
// "centers_path" pointing at a settlements GeoJSON).
FireSceneSpec parse_fire_scene_spec(const nlohmann::json& j, const std::string& base_dir);
SarSceneSpec parse_sar_scene_spec(const nlohmann::json& j);
CoherenceSceneSpec parse_coherence_scene_spec(const nlohmann::json& j);
GridSpec parse_grid_spec(const nlohmann::json& j);

} // namespace csd
