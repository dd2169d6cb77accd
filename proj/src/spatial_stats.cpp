#include "csd/spatial_stats.hpp"

#include "csd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace csd {

namespace {

PointSet project(const std::vector<LonLat>& lonlat, std::optional<LonLat> origin) {
    if (lonlat.empty()) throw ValidationError("project_local: need at least one point");
    for (const auto& p : lonlat) {
        if (!std::isfinite(p.lon) || !std::isfinite(p.lat))
            throw ValidationError("project_local: non-finite coordinate");
    }
    LonLat o;
    if (origin) {
        o = *origin;
    } else {
        double slon = 0.0, slat = 0.0;
        for (const auto& p : lonlat) {
            slon += p.lon;
            slat += p.lat;
        }
        o.lon = slon / static_cast<double>(lonlat.size());
        o.lat = slat / static_cast<double>(lonlat.size());
    }
    const double to_rad = std::numbers::pi / 180.0;
    const double cos_lat0 = std::cos(o.lat * to_rad);
    PointSet ps;
    ps.origin = o;
    ps.points.reserve(lonlat.size());
    for (const auto& p : lonlat) {
        const double x = kEarthRadiusM * (p.lon - o.lon) * to_rad * cos_lat0;
        const double y = kEarthRadiusM * (p.lat - o.lat) * to_rad;
        ps.points.emplace_back(x, y);
    }
    return ps;
}

} // namespace

PointSet project_local(const std::vector<LonLat>& lonlat, std::optional<LonLat> origin) {
    return project(lonlat, origin);
}

PointSet project_local(const std::vector<FireDetection>& detections, std::optional<LonLat> origin) {
    std::vector<LonLat> pts;
    pts.reserve(detections.size());
    for (const auto& d : detections) pts.push_back(LonLat{d.lon, d.lat});
    return project(pts, origin);
}

Bandwidth scott_bandwidth(const PointSet& ps) {
    const std::size_t n = ps.n();
    if (n < 2) throw ValidationError("scott_bandwidth: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : ps.points) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : ps.points) {
        sx += (x - mx) * (x - mx);
        sy += (y - my) * (y - my);
    }
    sx = std::sqrt(sx / static_cast<double>(n - 1));
    sy = std::sqrt(sy / static_cast<double>(n - 1));
    if (sx <= 0.0 || sy <= 0.0)
        throw ValidationError("scott_bandwidth: zero spread on an axis; pass an explicit bandwidth");
    const double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);
    return Bandwidth{sx * factor, sy * factor};
}

std::vector<double> kde2d_densities(const PointSet& ps, const GridSpec& grid, const Bandwidth& bw) {
    grid.validate();
    if (ps.n() == 0) throw ValidationError("kde2d: empty point set");
    if (!(bw.hx > 0.0) || !(bw.hy > 0.0)) throw ValidationError("kde2d: bandwidth must be positive");

    const double norm =
        1.0 / (static_cast<double>(ps.n()) * 2.0 * std::numbers::pi * bw.hx * bw.hy);
    const double inv2hx2 = 1.0 / (2.0 * bw.hx * bw.hx);
    const double inv2hy2 = 1.0 / (2.0 * bw.hy * bw.hy);

    std::vector<double> out(grid.cell_count());
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const auto [cx, cy] = grid.cell_center(r, c);
            double sum = 0.0;
            for (const auto& [px, py] : ps.points) {
                const double dx = cx - px;
                const double dy = cy - py;
                sum += std::exp(-(dx * dx * inv2hx2 + dy * dy * inv2hy2));
            }
            out[static_cast<std::size_t>(r) * grid.width + c] = sum * norm;
        }
    }
    return out;
}

Raster kde2d_raw(const PointSet& ps, const GridSpec& grid, std::optional<Bandwidth> bandwidth) {
    const Bandwidth bw = bandwidth ? *bandwidth : scott_bandwidth(ps);
    const std::vector<double> dens = kde2d_densities(ps, grid, bw);
    Raster out;
    out.grid = grid;
    out.values.resize(dens.size());
    for (std::size_t i = 0; i < dens.size(); ++i) out.values[i] = static_cast<float>(dens[i]);
    return out;
}

void DensityRaster::validate() const {
    raster.validate();
    if (raster.nodata) throw ValidationError("density raster: nodata cells not allowed");
    double sum = 0.0;
    for (float v : raster.values) {
        if (v < 0.0f) throw ValidationError("density raster: negative mass");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("density raster: masses sum to " + std::to_string(sum));
}

DensityRaster kde2d(const PointSet& ps, const GridSpec& grid, std::optional<Bandwidth> bandwidth) {
    const Bandwidth bw = bandwidth ? *bandwidth : scott_bandwidth(ps);
    const std::vector<double> dens = kde2d_densities(ps, grid, bw);
    // Fixed left-to-right reduction; cell_area is constant so it cancels in
    // the normalization.
    double total = 0.0;
    for (double v : dens) total += v;
    if (!(total > 0.0)) throw ValidationError("kde2d: zero total density on grid (grid far from points?)");
    DensityRaster out;
    out.raster.grid = grid;
    out.raster.values.resize(dens.size());
    for (std::size_t i = 0; i < dens.size(); ++i)
        out.raster.values[i] = static_cast<float>(dens[i] / total);
    // float32 rounding leaves the stored masses summing to 1 +- O(1e-8);
    // compensate the residual into one small-magnitude cell, where an ulp is
    // far below the 1e-9 contract.
    auto& v = out.raster.values;
    std::size_t cstar = 0;
    bool found = false;
    float best = std::numeric_limits<float>::max();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= 1e-5f && v[i] < best) {
            best = v[i];
            cstar = i;
            found = true;
        }
    }
    if (!found) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[cstar]) cstar = i;
    }
    double others = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (i != cstar) others += v[i];
    const double target = 1.0 - others;
    if (target > 0.0) v[cstar] = static_cast<float>(target);
    out.bandwidth = bw;
    out.validate();
    return out;
}

GridSpec kde_grid_for(const PointSet& ps, const Bandwidth& bw, double cell_size, double pad_bandwidths,
                      const std::string& crs) {
    if (ps.n() == 0) throw ValidationError("kde_grid_for: empty point set");
    if (!(cell_size > 0.0)) throw ValidationError("kde_grid_for: cell size must be > 0");
    double xmin = ps.points[0].first, xmax = xmin, ymin = ps.points[0].second, ymax = ymin;
    for (const auto& [x, y] : ps.points) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double pad_x = pad_bandwidths * bw.hx;
    const double pad_y = pad_bandwidths * bw.hy;
    GridSpec g;
    g.dx = cell_size;
    g.dy = -cell_size;
    g.x0 = xmin - pad_x;
    g.y0 = ymax + pad_y;
    g.width = std::max(1, static_cast<int>(std::ceil((xmax + pad_x - g.x0) / cell_size)));
    g.height = std::max(1, static_cast<int>(std::ceil((g.y0 - (ymin - pad_y)) / cell_size)));
    g.crs = crs;
    g.validate();
    return g;
}

namespace {

struct Binning {
    double lo = 0.0;
    double width = 0.0; // 0 => constant raster, everything in bin 0
    int bins = 1;

    int bin_of(double v) const {
        if (width <= 0.0) return 0;
        int b = static_cast<int>((v - lo) / width);
        if (b < 0) b = 0;
        if (b >= bins) b = bins - 1;
        return b;
    }
};

Binning make_binning(const Raster& r, int bins) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (!r.is_valid(i)) continue;
        const double v = r.values[i];
        if (!any || v < lo) lo = v;
        if (!any || v > hi) hi = v;
        any = true;
    }
    if (!any) throw ValidationError("mutual_information: raster has no valid cells");
    Binning b;
    b.lo = lo;
    b.bins = bins;
    b.width = hi > lo ? (hi - lo) / bins : 0.0;
    return b;
}

double entropy_of_pmf(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

} // namespace

MiResult mutual_information(const Raster& a, const Raster& b, int bins) {
    if (!(a.grid == b.grid)) throw ValidationError("mutual_information: rasters are on different grids");
    if (bins < 1) throw ValidationError("mutual_information: bins must be >= 1");
    a.validate();
    b.validate();

    const Binning ba = make_binning(a, bins);
    const Binning bb = make_binning(b, bins);

    JointHistogram h;
    h.bins_a = bins;
    h.bins_b = bins;
    h.joint.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (!a.is_valid(i) || !b.is_valid(i)) continue;
        const int ia = ba.bin_of(a.values[i]);
        const int ib = bb.bin_of(b.values[i]);
        h.joint[static_cast<std::size_t>(ia) * bins + ib] += 1.0;
        ++n;
    }
    if (n == 0) throw ValidationError("mutual_information: no co-located valid cells");
    for (double& v : h.joint) v /= static_cast<double>(n);

    h.p_a.assign(bins, 0.0);
    h.p_b.assign(bins, 0.0);
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const double p = h.at(i, j);
            h.p_a[static_cast<std::size_t>(i)] += p;
            h.p_b[static_cast<std::size_t>(j)] += p;
        }

    double mi = 0.0;
    for (int i = 0; i < bins; ++i) {
        for (int j = 0; j < bins; ++j) {
            const double p = h.at(i, j);
            if (p > 0.0) mi += p * std::log(p / (h.p_a[static_cast<std::size_t>(i)] * h.p_b[static_cast<std::size_t>(j)]));
        }
    }

    MiResult res;
    res.mi_nats = mi;
    res.entropy_a = entropy_of_pmf(h.p_a);
    res.entropy_b = entropy_of_pmf(h.p_b);
    res.hist = std::move(h);
    return res;
}

double entropy(const Raster& r, int bins) {
    if (bins < 1) throw ValidationError("entropy: bins must be >= 1");
    r.validate();
    const Binning b = make_binning(r, bins);
    std::vector<double> p(static_cast<std::size_t>(bins), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (!r.is_valid(i)) continue;
        p[static_cast<std::size_t>(b.bin_of(r.values[i]))] += 1.0;
        ++n;
    }
    if (n == 0) throw ValidationError("entropy: raster has no valid cells");
    for (double& x : p) x /= static_cast<double>(n);
    return entropy_of_pmf(p);
}

} // namespace csd
