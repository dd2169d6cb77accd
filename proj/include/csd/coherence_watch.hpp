#pragma once

#include "csd/date.hpp"
#include "csd/geodata.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace csd {

// A RasterStack whose valid values lie in [0, 1]; each layer's timestamp is
// the later acquisition date of its interferometric pair.
struct CoherenceStack {
    RasterStack stack;

    static CoherenceStack from(RasterStack s); // validates the [0, 1] range
    const GridSpec& grid() const { return stack.grid(); }
    std::size_t size() const { return stack.size(); }
};

struct EventParams {
    double tau_low = 0.35;  // baseline must sit below this
    double tau_high = 0.6;  // event requires persistence_k layers at or above
    int persistence_k = 2;
    int baseline_n = 6;     // layers averaged for the pre-event baseline

    void validate() const;
};

// Per-pixel first low-to-high event. event_layer is the index of the first
// layer of the qualifying run (-1 = no event); its timestamp is the event date.
struct EventMap {
    GridSpec grid;
    std::vector<Date> timestamps;          // stack timestamps
    std::vector<std::int32_t> event_layer; // -1 none
    std::vector<std::uint8_t> valid;

    std::optional<Date> date_at(std::size_t pixel) const {
        const std::int32_t i = event_layer[pixel];
        return i >= 0 ? std::optional<Date>(timestamps[static_cast<std::size_t>(i)]) : std::nullopt;
    }
    std::size_t event_count() const;

    // Days-since-epoch float raster, nodata where no event.
    Raster to_date_raster() const;
};

// Eligibility: mean of the valid values among the first baseline_n layers is
// < tau_low. Event: first i >= baseline_n whose persistence_k consecutive
// values are all >= tau_high (a nodata layer breaks the run).
EventMap detect_low_to_high(const CoherenceStack& stack, const EventParams& params);

// 4-connected components of event pixels with size >= min_size_px, as a
// GeoJSON FeatureCollection of bounding-box polygons in world coordinates.
// Properties: pixel_count, area_m2, first_event_date, last_event_date.
nlohmann::json events_to_components(const EventMap& events, int min_size_px = 5);

} // namespace csd
