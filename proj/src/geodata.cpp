#include "csd/geodata.hpp"

#include "csd/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace csd {

double GridSpec::cell_area() const {
    return std::abs(dx * dy);
}

std::pair<double, double> GridSpec::cell_center(int row, int col) const {
    return {x0 + (col + 0.5) * dx, y0 + (row + 0.5) * dy};
}

void GridSpec::validate() const {
    if (!(dx > 0.0)) throw ValidationError("grid: dx must be > 0");
    if (dy == 0.0 || !std::isfinite(dy)) throw ValidationError("grid: dy must be nonzero and finite");
    if (!std::isfinite(dx) || !std::isfinite(x0) || !std::isfinite(y0))
        throw ValidationError("grid: non-finite geotransform");
    if (width < 1 || height < 1) throw ValidationError("grid: width and height must be >= 1");
}

void Raster::validate() const {
    grid.validate();
    if (values.size() != grid.cell_count()) {
        throw ValidationError("raster: value count " + std::to_string(values.size()) +
                              " does not match grid " + std::to_string(grid.width) + "x" +
                              std::to_string(grid.height));
    }
    if (nodata && !std::isfinite(*nodata)) throw ValidationError("raster: nodata sentinel must be finite");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float v = values[i];
        if (!std::isfinite(v) && !(nodata && v == *nodata)) {
            throw ValidationError("raster: non-finite value at index " + std::to_string(i));
        }
    }
    if (timestamp && !timestamp->is_valid()) throw ValidationError("raster: invalid timestamp");
}

Raster Raster::constant(const GridSpec& g, float value) {
    Raster r;
    r.grid = g;
    r.values.assign(g.cell_count(), value);
    return r;
}

void RasterStack::validate() const {
    if (layers.empty()) throw ValidationError("stack: no layers");
    if (timestamps.size() != layers.size()) throw ValidationError("stack: timestamp/layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (!(layers[i].grid == layers[0].grid))
            throw ValidationError("stack: grid mismatch at layer " + std::to_string(i));
        if (i > 0 && !(timestamps[i - 1] < timestamps[i]))
            throw ValidationError("stack: timestamps not strictly increasing at layer " + std::to_string(i));
    }
}

std::string raster_base_path(const std::string& path) {
    if (path.size() > 5 && path.ends_with(".json")) return path.substr(0, path.size() - 5);
    if (path.size() > 4 && path.ends_with(".bin")) return path.substr(0, path.size() - 4);
    return path;
}

namespace {

void pack_f32le(float v, unsigned char out[4]) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    out[0] = static_cast<unsigned char>(u & 0xff);
    out[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    out[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    out[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

float unpack_f32le(const unsigned char in[4]) {
    const std::uint32_t u = static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
                            (static_cast<std::uint32_t>(in[2]) << 16) |
                            (static_cast<std::uint32_t>(in[3]) << 24);
    return std::bit_cast<float>(u);
}

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(std::string(what) + ": cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

} // namespace

Raster read_raster(const std::string& path) {
    const std::string base = raster_base_path(path);
    const std::string header_path = base + ".json";
    const std::string payload_path = base + ".bin";

    const json h = load_json_file(header_path, "raster header");
    Raster r;
    try {
        r.grid.width = h.at("width").get<int>();
        r.grid.height = h.at("height").get<int>();
        const std::string dtype = h.at("dtype").get<std::string>();
        if (dtype != "f32le") throw ValidationError("raster header: unsupported dtype '" + dtype + "'");
        r.grid.x0 = h.at("x0").get<double>();
        r.grid.y0 = h.at("y0").get<double>();
        r.grid.dx = h.at("dx").get<double>();
        r.grid.dy = h.at("dy").get<double>();
        r.grid.crs = h.at("crs").get<std::string>();
        if (!h.at("nodata").is_null()) r.nodata = h.at("nodata").get<float>();
        if (!h.at("timestamp").is_null())
            r.timestamp = parse_date_or_throw(h.at("timestamp").get<std::string>(), "raster header timestamp");
    } catch (const json::exception& e) {
        throw ValidationError("raster header " + header_path + ": " + e.what());
    }
    r.grid.validate();

    std::ifstream in(payload_path, std::ios::binary);
    if (!in) throw ValidationError("raster payload: cannot open " + payload_path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t expected = r.grid.cell_count() * 4;
    if (bytes.size() != expected) {
        throw ValidationError("raster payload " + payload_path + ": " + std::to_string(bytes.size()) +
                              " bytes, expected " + std::to_string(expected));
    }
    r.values.resize(r.grid.cell_count());
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = unpack_f32le(&bytes[i * 4]);
    r.validate();
    return r;
}

void write_raster(const Raster& r, const std::string& path) {
    r.validate();
    const std::string base = raster_base_path(path);

    json h;
    h["width"] = r.grid.width;
    h["height"] = r.grid.height;
    h["dtype"] = "f32le";
    h["x0"] = r.grid.x0;
    h["y0"] = r.grid.y0;
    h["dx"] = r.grid.dx;
    h["dy"] = r.grid.dy;
    h["nodata"] = r.nodata ? json(*r.nodata) : json(nullptr);
    h["crs"] = r.grid.crs;
    h["timestamp"] = r.timestamp ? json(r.timestamp->to_string()) : json(nullptr);
    write_text_file(base + ".json", h.dump(2) + "\n");

    std::vector<unsigned char> bytes(r.values.size() * 4);
    for (std::size_t i = 0; i < r.values.size(); ++i) pack_f32le(r.values[i], &bytes[i * 4]);
    std::ofstream out(base + ".bin", std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("raster payload: cannot write " + base + ".bin");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("raster payload: short write to " + base + ".bin");
}

RasterStack read_stack(const std::string& manifest_path) {
    const json m = load_json_file(manifest_path, "stack manifest");
    if (!m.is_array() || m.empty()) throw ValidationError("stack manifest: expected non-empty JSON array");

    struct Entry {
        Date date;
        std::string path;
    };
    std::vector<Entry> entries;
    const fs::path dir = fs::path(manifest_path).parent_path();
    for (const auto& item : m) {
        Entry e;
        try {
            e.date = parse_date_or_throw(item.at("timestamp").get<std::string>(), "stack manifest timestamp");
            e.path = item.at("path").get<std::string>();
        } catch (const json::exception& ex) {
            throw ValidationError(std::string("stack manifest entry: ") + ex.what());
        }
        if (fs::path(e.path).is_relative()) e.path = (dir / e.path).string();
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].date == entries[i - 1].date) {
            throw ValidationError("stack manifest: duplicate timestamp " + entries[i].date.to_string() +
                                  " (" + entries[i - 1].path + ", " + entries[i].path + ")");
        }
    }

    RasterStack stack;
    for (const auto& e : entries) {
        Raster layer = read_raster(e.path);
        layer.timestamp = e.date; // manifest timestamp is authoritative
        if (!stack.layers.empty() && !(layer.grid == stack.layers[0].grid)) {
            throw ValidationError("stack: grid mismatch between " + entries[0].path + " and " + e.path);
        }
        stack.layers.push_back(std::move(layer));
        stack.timestamps.push_back(e.date);
    }
    stack.validate();
    return stack;
}

void quicklook(const Raster& r, const std::string& path) {
    r.validate();
    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (!r.is_valid(i)) continue;
        const float v = r.values[i];
        if (!any || v < lo) lo = v;
        if (!any || v > hi) hi = v;
        any = true;
    }
    if (!any) throw ValidationError("quicklook: raster has no valid pixels");

    std::string out;
    out.reserve(r.values.size() + 32);
    out += "P5\n" + std::to_string(r.grid.width) + " " + std::to_string(r.grid.height) + "\n255\n";
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        unsigned char byte = 0;
        if (r.is_valid(i)) {
            if (hi == lo) {
                byte = 128;
            } else {
                const double x = (static_cast<double>(r.values[i]) - lo) / (static_cast<double>(hi) - lo) * 255.0;
                byte = static_cast<unsigned char>(std::lround(x));
            }
        }
        out.push_back(static_cast<char>(byte));
    }
    write_text_file(path, out);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("short write to " + path);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    const std::string bytes = read_text_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace csd
