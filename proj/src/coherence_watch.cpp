#include "csd/coherence_watch.hpp"

#include "csd/error.hpp"

#include <algorithm>
#include <deque>

using nlohmann::json;

namespace csd {

CoherenceStack CoherenceStack::from(RasterStack s) {
    s.validate();
    for (std::size_t li = 0; li < s.layers.size(); ++li) {
        const Raster& layer = s.layers[li];
        for (std::size_t p = 0; p < layer.values.size(); ++p) {
            if (!layer.is_valid(p)) continue;
            const float v = layer.values[p];
            if (v < 0.0f || v > 1.0f)
                throw ValidationError("coherence stack: value " + std::to_string(v) + " outside [0,1] in layer " +
                                      std::to_string(li));
        }
    }
    CoherenceStack cs;
    cs.stack = std::move(s);
    return cs;
}

void EventParams::validate() const {
    if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0))
        throw ValidationError("event params: require 0 <= tau_low < tau_high <= 1");
    if (persistence_k < 1) throw ValidationError("event params: persistence_k must be >= 1");
    if (baseline_n < 1) throw ValidationError("event params: baseline_n must be >= 1");
}

std::size_t EventMap::event_count() const {
    std::size_t n = 0;
    for (std::int32_t e : event_layer) n += e >= 0;
    return n;
}

Raster EventMap::to_date_raster() const {
    Raster r;
    r.grid = grid;
    r.nodata = kDefaultNodata;
    r.values.resize(event_layer.size());
    for (std::size_t p = 0; p < event_layer.size(); ++p) {
        const auto d = date_at(p);
        r.values[p] = d ? static_cast<float>(d->to_days()) : kDefaultNodata;
    }
    return r;
}

EventMap detect_low_to_high(const CoherenceStack& cs, const EventParams& params) {
    params.validate();
    const RasterStack& stack = cs.stack;
    const std::size_t layers = stack.size();
    if (layers < static_cast<std::size_t>(params.baseline_n + params.persistence_k))
        throw ValidationError("detect_low_to_high: need at least baseline_n + persistence_k = " +
                              std::to_string(params.baseline_n + params.persistence_k) + " layers, have " +
                              std::to_string(layers));

    const GridSpec& grid = stack.grid();
    const std::size_t n = grid.cell_count();
    EventMap out;
    out.grid = grid;
    out.timestamps = stack.timestamps;
    out.event_layer.assign(n, -1);
    out.valid.assign(n, 0);

    for (std::size_t p = 0; p < n; ++p) {
        double baseline_sum = 0.0;
        int baseline_count = 0;
        for (int i = 0; i < params.baseline_n; ++i) {
            const Raster& layer = stack.layers[static_cast<std::size_t>(i)];
            if (layer.is_valid(p)) {
                baseline_sum += layer.values[p];
                ++baseline_count;
            }
        }
        if (baseline_count == 0) continue; // nothing to baseline against
        out.valid[p] = 1;
        const double baseline = baseline_sum / baseline_count;
        if (!(baseline < params.tau_low)) continue; // not a low-coherence pixel

        const std::size_t last_start = layers - static_cast<std::size_t>(params.persistence_k);
        for (std::size_t i = static_cast<std::size_t>(params.baseline_n); i <= last_start; ++i) {
            bool run = true;
            for (int k = 0; k < params.persistence_k; ++k) {
                const Raster& layer = stack.layers[i + static_cast<std::size_t>(k)];
                if (!layer.is_valid(p) || layer.values[p] < params.tau_high) {
                    run = false;
                    break;
                }
            }
            if (run) {
                out.event_layer[p] = static_cast<std::int32_t>(i);
                break;
            }
        }
    }
    return out;
}

json events_to_components(const EventMap& events, int min_size_px) {
    if (min_size_px < 1) throw ValidationError("events_to_components: min_size_px must be >= 1");
    const GridSpec& g = events.grid;
    const int w = g.width, h = g.height;
    std::vector<std::uint8_t> seen(events.event_layer.size(), 0);

    json features = json::array();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t p0 = static_cast<std::size_t>(r) * w + c;
            if (seen[p0] || events.event_layer[p0] < 0) continue;

            // BFS in scan order keeps labeling deterministic.
            std::deque<std::pair<int, int>> queue{{r, c}};
            seen[p0] = 1;
            int rmin = r, rmax = r, cmin = c, cmax = c;
            std::size_t count = 0;
            Date first = events.timestamps[static_cast<std::size_t>(events.event_layer[p0])];
            Date last = first;
            while (!queue.empty()) {
                const auto [cr, cc] = queue.front();
                queue.pop_front();
                ++count;
                rmin = std::min(rmin, cr);
                rmax = std::max(rmax, cr);
                cmin = std::min(cmin, cc);
                cmax = std::max(cmax, cc);
                const std::size_t cp = static_cast<std::size_t>(cr) * w + cc;
                const Date d = events.timestamps[static_cast<std::size_t>(events.event_layer[cp])];
                first = std::min(first, d);
                last = std::max(last, d);
                const int nbr[4][2] = {{cr - 1, cc}, {cr + 1, cc}, {cr, cc - 1}, {cr, cc + 1}};
                for (const auto& [nr, nc] : nbr) {
                    if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                    const std::size_t np = static_cast<std::size_t>(nr) * w + nc;
                    if (seen[np] || events.event_layer[np] < 0) continue;
                    seen[np] = 1;
                    queue.emplace_back(nr, nc);
                }
            }
            if (count < static_cast<std::size_t>(min_size_px)) continue;

            // Outer corners of the pixel bounding box, world coordinates.
            const double x0 = g.x0 + cmin * g.dx;
            const double x1 = g.x0 + (cmax + 1) * g.dx;
            const double y0 = g.y0 + rmin * g.dy;
            const double y1 = g.y0 + (rmax + 1) * g.dy;

            json feature;
            feature["type"] = "Feature";
            feature["geometry"] = {
                {"type", "Polygon"},
                {"coordinates",
                 json::array({json::array({json::array({x0, y0}), json::array({x1, y0}),
                                           json::array({x1, y1}), json::array({x0, y1}),
                                           json::array({x0, y0})})})},
            };
            feature["properties"] = {
                {"pixel_count", count},
                {"area_m2", static_cast<double>(count) * g.cell_area()},
                {"first_event_date", first.to_string()},
                {"last_event_date", last.to_string()},
            };
            features.push_back(std::move(feature));
        }
    }

    json fc;
    fc["type"] = "FeatureCollection";
    fc["crs"] = g.crs;
    fc["features"] = std::move(features);
    return fc;
}

} // namespace csd
