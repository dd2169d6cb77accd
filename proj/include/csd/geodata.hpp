#pragma once

#include "csd/date.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace csd {

constexpr float kDefaultNodata = -9999.0f;

// Geo-referenced grid. (x0, y0) is the outer top-left corner; dx > 0 is the
// pixel width; dy is the signed row step (negative for north-up rasters).
struct GridSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = -1.0;
    int width = 1;
    int height = 1;
    std::string crs = "LOCAL";

    bool operator==(const GridSpec&) const = default;

    double cell_area() const;
    std::pair<double, double> cell_center(int row, int col) const;
    std::size_t cell_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

    void validate() const; // throws ValidationError
};

// Single-band float32 raster, row-major, top row first. A value is valid
// unless it compares exactly equal to the nodata sentinel. NaN anywhere is a
// validation error; nodata is always a finite sentinel.
struct Raster {
    GridSpec grid;
    std::vector<float> values;
    std::optional<float> nodata;
    std::optional<Date> timestamp;

    float at(int row, int col) const { return values[static_cast<std::size_t>(row) * grid.width + col]; }
    float& at(int row, int col) { return values[static_cast<std::size_t>(row) * grid.width + col]; }
    bool is_valid(std::size_t i) const { return !nodata || values[i] != *nodata; }
    bool is_valid(int row, int col) const { return is_valid(static_cast<std::size_t>(row) * grid.width + col); }

    void validate() const; // throws ValidationError

    static Raster constant(const GridSpec& g, float value);
};

// Time-ordered rasters on one shared grid.
struct RasterStack {
    std::vector<Raster> layers;
    std::vector<Date> timestamps;

    std::size_t size() const { return layers.size(); }
    const GridSpec& grid() const { return layers.front().grid; }

    void validate() const; // identical grids, strictly increasing timestamps
};

// File I/O. A raster on disk is a pair <base>.json (header) + <base>.bin
// (row-major float32 little-endian payload). `path` may name the base, the
// .json or the .bin.
std::string raster_base_path(const std::string& path);
Raster read_raster(const std::string& path);
void write_raster(const Raster& r, const std::string& path);

// Manifest: JSON array of {"timestamp": "YYYY-MM-DD", "path": ...}; relative
// paths resolve against the manifest's directory. Layers are returned sorted
// by timestamp; duplicate timestamps or grid mismatches are errors.
RasterStack read_stack(const std::string& manifest_path);

// 8-bit binary PGM quicklook: valid values stretched min->0 max->255
// (rounding half away from zero), nodata -> 0, constant raster -> 128.
void quicklook(const Raster& r, const std::string& path);

// Small shared helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::string& path);

} // namespace csd
