#include "csd/sar_change.hpp"

#include "csd/error.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

void ChangeParams::validate_detector() const {
    if (!(threshold > 0.0)) throw ValidationError("change params: threshold must be > 0");
    if (min_area_px < 1) throw ValidationError("change params: min_area_px must be >= 1");
    if (stat_window_px < 1 || stat_window_px % 2 == 0)
        throw ValidationError("change params: stat_window_px must be odd and >= 1");
}

void ChangeParams::validate() const {
    validate_detector();
    if (!(ref_start < ref_end)) throw ValidationError("change params: reference range is empty");
}

std::size_t ChangeMap::changed_count() const {
    std::size_t n = 0;
    for (std::uint8_t m : mask) n += m;
    return n;
}

Raster ChangeMap::to_raster() const {
    Raster r;
    r.grid = grid;
    r.nodata = kDefaultNodata;
    r.timestamp = window_end;
    r.values.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
        r.values[i] = valid[i] ? (mask[i] ? 1.0f : 0.0f) : kDefaultNodata;
    return r;
}

Raster median_composite(const RasterStack& stack, Date t0, Date t1) {
    stack.validate();
    if (!(t0 < t1)) throw ValidationError("median_composite: empty date range");
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < stack.size(); ++i) {
        if (!(stack.timestamps[i] < t0) && stack.timestamps[i] < t1) sel.push_back(i);
    }
    if (sel.empty())
        throw ValidationError("median_composite: no layers in [" + t0.to_string() + ", " +
                              t1.to_string() + ")");

    const GridSpec& grid = stack.grid();
    Raster out;
    out.grid = grid;
    out.nodata = stack.layers[sel[0]].nodata ? stack.layers[sel[0]].nodata : std::optional<float>(kDefaultNodata);
    out.values.resize(grid.cell_count());

    std::vector<double> vals;
    vals.reserve(sel.size());
    for (std::size_t p = 0; p < grid.cell_count(); ++p) {
        vals.clear();
        for (std::size_t idx : sel) {
            const Raster& layer = stack.layers[idx];
            if (layer.is_valid(p)) vals.push_back(layer.values[p]);
        }
        if (vals.empty()) {
            out.values[p] = *out.nodata;
            continue;
        }
        std::sort(vals.begin(), vals.end());
        const std::size_t m = vals.size();
        const double med = (m % 2 == 1) ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
        out.values[p] = static_cast<float>(med);
    }
    return out;
}

std::vector<TestComposite> pairwise_test_composites(const RasterStack& stack, Date after) {
    stack.validate();
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < stack.size(); ++i)
        if (after < stack.timestamps[i]) sel.push_back(i);
    if (sel.size() < 2)
        throw ValidationError("pairwise_test_composites: need at least 2 layers after " +
                              after.to_string());

    const GridSpec& grid = stack.grid();
    std::vector<TestComposite> out;
    out.reserve(sel.size() - 1);
    for (std::size_t k = 0; k + 1 < sel.size(); ++k) {
        const Raster& a = stack.layers[sel[k]];
        const Raster& b = stack.layers[sel[k + 1]];
        TestComposite tc;
        tc.date_start = stack.timestamps[sel[k]];
        tc.date_end = stack.timestamps[sel[k + 1]];
        tc.image.grid = grid;
        tc.image.nodata = a.nodata ? a.nodata : std::optional<float>(kDefaultNodata);
        tc.image.timestamp = tc.date_end;
        tc.image.values.resize(grid.cell_count());
        for (std::size_t p = 0; p < grid.cell_count(); ++p) {
            const bool va = a.is_valid(p), vb = b.is_valid(p);
            if (va && vb)
                tc.image.values[p] =
                    static_cast<float>(0.5 * (static_cast<double>(a.values[p]) + b.values[p]));
            else if (va)
                tc.image.values[p] = a.values[p];
            else if (vb)
                tc.image.values[p] = b.values[p];
            else
                tc.image.values[p] = *tc.image.nodata;
        }
        out.push_back(std::move(tc));
    }
    return out;
}

namespace {

double to_linear(double v, InputScale scale) {
    return scale == InputScale::db ? std::pow(10.0, v / 10.0) : v;
}

// Mean of the statistic over a w x w window, valid pixels only; invalid
// centers stay invalid. w == 1 returns the input untouched.
void box_mean(const std::vector<double>& stat, const std::vector<std::uint8_t>& valid, int width,
              int height, int w, std::vector<double>& out) {
    if (w == 1) {
        out = stat;
        return;
    }
    const int half = w / 2;
    out.assign(stat.size(), 0.0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const std::size_t p = static_cast<std::size_t>(r) * width + c;
            if (!valid[p]) continue;
            double sum = 0.0;
            int n = 0;
            const int r0 = std::max(0, r - half), r1 = std::min(height - 1, r + half);
            const int c0 = std::max(0, c - half), c1 = std::min(width - 1, c + half);
            for (int rr = r0; rr <= r1; ++rr) {
                for (int cc = c0; cc <= c1; ++cc) {
                    const std::size_t q = static_cast<std::size_t>(rr) * width + cc;
                    if (!valid[q]) continue;
                    sum += stat[q];
                    ++n;
                }
            }
            out[p] = sum / n;
        }
    }
}

} // namespace

ChangeMap log_ratio_change(const Raster& reference, const Raster& test, const ChangeParams& params) {
    params.validate_detector();
    if (!(reference.grid == test.grid))
        throw ValidationError("log_ratio_change: reference and test are on different grids");

    const GridSpec& grid = reference.grid;
    const std::size_t n = grid.cell_count();
    std::vector<double> stat(n, 0.0);
    std::vector<std::uint8_t> valid(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        if (!reference.is_valid(p) || !test.is_valid(p)) continue;
        const double rv = to_linear(reference.values[p], params.input_scale);
        const double tv = to_linear(test.values[p], params.input_scale);
        if (!(rv > 0.0) || !(tv > 0.0))
            throw ValidationError("log_ratio_change: non-positive linear value at pixel " +
                                  std::to_string(p));
        double c = 0.0;
        switch (params.direction) {
            case ChangeDirection::decrease: c = std::log(rv / tv); break;
            case ChangeDirection::increase: c = std::log(tv / rv); break;
            case ChangeDirection::both: c = std::abs(std::log(tv / rv)); break;
        }
        stat[p] = c;
        valid[p] = 1;
    }

    std::vector<double> smoothed;
    box_mean(stat, valid, grid.width, grid.height, params.stat_window_px, smoothed);

    ChangeMap map;
    map.grid = grid;
    if (test.timestamp) map.window_end = *test.timestamp;
    map.mask.assign(n, 0);
    map.valid = std::move(valid);
    for (std::size_t p = 0; p < n; ++p)
        if (map.valid[p] && smoothed[p] > params.threshold) map.mask[p] = 1;
    return map;
}

ChangeDetectionResult run_change_detection(const RasterStack& stack, const ChangeParams& params) {
    params.validate();
    stack.validate();

    // All downstream arithmetic is in linear power.
    const RasterStack* work = &stack;
    RasterStack converted;
    if (params.input_scale == InputScale::db) {
        converted.timestamps = stack.timestamps;
        converted.layers.reserve(stack.size());
        for (const Raster& layer : stack.layers) {
            Raster lin = layer;
            for (std::size_t p = 0; p < lin.values.size(); ++p)
                if (lin.is_valid(p))
                    lin.values[p] = static_cast<float>(to_linear(lin.values[p], InputScale::db));
            converted.layers.push_back(std::move(lin));
        }
        work = &converted;
    }
    ChangeParams linear_params = params;
    linear_params.input_scale = InputScale::linear;

    ChangeDetectionResult result;
    result.reference = median_composite(*work, params.ref_start, params.ref_end);
    const std::vector<TestComposite> tests =
        pairwise_test_composites(*work, params.ref_end.plus_days(-1));

    const GridSpec& grid = work->grid();
    const double cell_area = grid.cell_area();
    const std::size_t n = grid.cell_count();
    std::vector<std::uint8_t> ever(n, 0);
    double cum_area = 0.0;

    for (const TestComposite& tc : tests) {
        ChangeMap map = log_ratio_change(result.reference, tc.image, linear_params);
        map.window_start = tc.date_start;
        map.window_end = tc.date_end;

        std::size_t new_count = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (map.mask[p] && !ever[p]) {
                ever[p] = 1;
                ++new_count;
            }
        }
        cum_area += static_cast<double>(new_count) * cell_area;

        ChangeRow row;
        row.window_end = tc.date_end;
        row.new_area_m2 = static_cast<double>(new_count) * cell_area;
        row.cum_area_m2 = cum_area;
        result.series.rows.push_back(row);
        if (!result.series.first_detection_date && new_count >= static_cast<std::size_t>(params.min_area_px))
            result.series.first_detection_date = tc.date_end;

        result.maps.push_back(std::move(map));
    }
    result.series.total_area_m2 = cum_area;

    result.cumulative_mask.grid = grid;
    result.cumulative_mask.nodata = kDefaultNodata;
    result.cumulative_mask.values.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        if (!result.reference.is_valid(p))
            result.cumulative_mask.values[p] = kDefaultNodata;
        else
            result.cumulative_mask.values[p] = ever[p] ? 1.0f : 0.0f;
    }
    return result;
}

double area_of(const ChangeMap& map) {
    return static_cast<double>(map.changed_count()) * map.grid.cell_area();
}

} // namespace csd
