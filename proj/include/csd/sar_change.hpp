#pragma once

#include "csd/date.hpp"
#include "csd/geodata.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace csd {

enum class ChangeDirection { decrease, increase, both };
enum class InputScale { linear, db };

struct ChangeParams {
    double threshold = 0.4;                                   // on the natural-log ratio
    ChangeDirection direction = ChangeDirection::decrease;    // clearing lowers VH backscatter
    InputScale input_scale = InputScale::linear;
    int min_area_px = 10;   // new-change pixel gate for the first-detection date
    Date ref_start;         // reference composite range [ref_start, ref_end)
    Date ref_end;
    int stat_window_px = 5; // odd; statistic is averaged over this window before
                            // thresholding (multi-looking of the ratio); 1 = raw per-pixel

    void validate_detector() const; // fields used by log_ratio_change
    void validate() const;          // detector fields + reference range
};

struct ChangeMap {
    GridSpec grid;
    Date window_start; // earlier test acquisition
    Date window_end;   // later test acquisition; change is dated here
    std::vector<std::uint8_t> mask;  // 1 = changed
    std::vector<std::uint8_t> valid; // 0 where any input was nodata

    std::size_t changed_count() const;
    Raster to_raster() const; // 0/1 float, invalid -> nodata
};

struct ChangeRow {
    Date window_end;
    double new_area_m2 = 0.0;
    double cum_area_m2 = 0.0;
};

struct ChangeSeries {
    std::vector<ChangeRow> rows; // window order
    std::optional<Date> first_detection_date; // earliest window with new-change count >= min_area_px
    double total_area_m2 = 0.0;               // final cumulative
};

struct TestComposite {
    Date date_start;
    Date date_end;
    Raster image;
};

struct ChangeDetectionResult {
    ChangeSeries series;
    std::vector<ChangeMap> maps;
    Raster reference;
    Raster cumulative_mask; // 1 ever changed, 0 never, nodata where reference invalid
};

// Per-pixel median over layers with t0 <= timestamp < t1, nodata ignored;
// even count -> mean of the two middle values; all-nodata pixel -> nodata.
Raster median_composite(const RasterStack& stack, Date t0, Date t1);

// Mean of each consecutive layer pair whose dates are both > after, in linear
// power; one-sided where a single input is nodata. Overlapping windows,
// stride 1, chronological.
std::vector<TestComposite> pairwise_test_composites(const RasterStack& stack, Date after);

// decrease: c = ln(ref/test); increase: c = ln(test/ref); both: |ln(test/ref)|.
// c is averaged over stat_window_px (valid pixels only), then mask = c > threshold.
ChangeMap log_ratio_change(const Raster& reference, const Raster& test, const ChangeParams& params);

ChangeDetectionResult run_change_detection(const RasterStack& stack, const ChangeParams& params);

double area_of(const ChangeMap& map);

} // namespace csd
