#pragma once

#include "csd/firms.hpp"
#include "csd/geodata.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace csd {

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

// Points in a local planar frame, meters, via an equirectangular projection
// about `origin` (defaults to the centroid of the inputs).
struct PointSet {
    std::vector<std::pair<double, double>> points; // (x, y) meters
    LonLat origin;

    std::size_t n() const { return points.size(); }
};

constexpr double kEarthRadiusM = 6371000.0;

PointSet project_local(const std::vector<LonLat>& lonlat, std::optional<LonLat> origin = {});
PointSet project_local(const std::vector<FireDetection>& detections, std::optional<LonLat> origin = {});

struct Bandwidth {
    double hx = 0.0; // meters
    double hy = 0.0;
};

// Scott's rule, per axis: h_k = sigma_k * n^(-1/6). Requires n >= 2 and
// nonzero spread on both axes.
Bandwidth scott_bandwidth(const PointSet& ps);

// Gaussian density at every cell center: (1/n) * sum_i K(c - p_i), with an
// axis-separable Gaussian kernel, evaluated exactly (no tail truncation).
// Computation is double precision throughout; float32 is storage-only.
std::vector<double> kde2d_densities(const PointSet& ps, const GridSpec& grid, const Bandwidth& bandwidth);
Raster kde2d_raw(const PointSet& ps, const GridSpec& grid, std::optional<Bandwidth> bandwidth = {});

// Discrete probability mass per cell: kde2d_raw renormalized to sum to 1.
struct DensityRaster {
    Raster raster;
    Bandwidth bandwidth; // the bandwidth actually used

    void validate() const; // nonnegative, sums to 1 +- 1e-9, no nodata
};
DensityRaster kde2d(const PointSet& ps, const GridSpec& grid, std::optional<Bandwidth> bandwidth = {});

// Grid covering the point extent padded by pad_bandwidths * h on each side.
GridSpec kde_grid_for(const PointSet& ps, const Bandwidth& bw, double cell_size,
                      double pad_bandwidths = 3.0, const std::string& crs = "LOCAL-EQRECT");

struct JointHistogram {
    int bins_a = 0;
    int bins_b = 0;
    std::vector<double> joint; // row-major bins_a x bins_b, sums to 1
    std::vector<double> p_a;   // row sums
    std::vector<double> p_b;   // column sums

    double at(int i, int j) const { return joint[static_cast<std::size_t>(i) * bins_b + j]; }
};

struct MiResult {
    double mi_nats = 0.0;
    double entropy_a = 0.0; // of the binned values of a
    double entropy_b = 0.0;
    JointHistogram hist;
};

// Eq.-style discrete MI between two co-registered rasters: each raster's
// values are binned into `bins` equal-width bins over its own [min, max]
// (constant raster -> one occupied bin), the joint pmf is built from
// co-located cell pairs, and I = sum p log(p / (pa*pb)) in nats.
MiResult mutual_information(const Raster& a, const Raster& b, int bins = 32);

// Shannon entropy (nats) of the binned value distribution of one raster.
double entropy(const Raster& r, int bins = 32);

} // namespace csd
