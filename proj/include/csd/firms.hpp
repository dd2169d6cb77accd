#pragma once

#include "csd/date.hpp"

#include <optional>
#include <string>
#include <vector>

namespace csd {

// Geographic bounding box, degrees. Filters are inclusive of the boundary.
struct BBox {
    double lon_min = 0.0;
    double lat_min = 0.0;
    double lon_max = 0.0;
    double lat_max = 0.0;

    void validate() const;
    bool contains(double lon, double lat) const {
        return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
    }
};

// FIRMS confidence is messy: MODIS exports a 0-100 number, VIIRS a letter.
// The original tag is preserved; to_filter_value() is only used when a
// minimum-confidence threshold is applied (low->10, nominal->50, high->90).
struct Confidence {
    enum class Kind { absent, numeric, nominal };
    enum class Level { low, nominal, high };

    Kind kind = Kind::absent;
    double numeric = 0.0;
    Level level = Level::nominal;

    static Confidence absent() { return {}; }
    static Confidence from_numeric(double v) { return {Kind::numeric, v, Level::nominal}; }
    static Confidence from_level(Level l) { return {Kind::nominal, 0.0, l}; }

    // Absent confidence passes any filter.
    bool passes(double min_confidence) const;
};

struct FireDetection {
    double lat = 0.0; // [-90, 90]
    double lon = 0.0; // [-180, 180]
    Date acq_date;
    std::optional<int> acq_time_minutes; // minutes of day, 0..1439
    Confidence confidence;
    std::string instrument; // e.g. "MODIS", "VIIRS"
};

enum class ParseMode { strict, lenient };

struct ParseOptions {
    std::optional<BBox> bbox;
    std::optional<double> min_confidence; // 0..100
    std::optional<std::string> instrument; // case-insensitive match
    ParseMode mode = ParseMode::lenient;
};

struct ParseResult {
    std::vector<FireDetection> detections; // file order
    std::size_t skipped_malformed = 0;     // lenient mode only
    std::size_t skipped_filtered = 0;      // rejected by bbox/confidence/instrument
    std::size_t total_rows = 0;            // non-blank data rows seen

    std::size_t skipped() const { return skipped_malformed + skipped_filtered; }
};

// CSV with a header row; required columns latitude, longitude, acq_date
// (case-insensitive, any order); recognized optional columns acq_time,
// confidence, instrument, satellite. Extra columns are ignored.
ParseResult parse_firms_csv(const std::string& path, const ParseOptions& options = {});

// Same parser over an in-memory buffer (the simulator round-trips through this).
ParseResult parse_firms_csv_text(const std::string& text, const ParseOptions& options,
                                 const std::string& origin_label);

// Detections with start <= acq_date <= end, order preserved.
std::vector<FireDetection> filter_by_dates(const std::vector<FireDetection>& detections, Date start,
                                           Date end);

} // namespace csd
