// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/types.hpp"
#include "sphaira/spatial/grid.hpp"
#include "sphaira/spatial/kdtree.hpp"

namespace sphaira {

/**
 * Scale schedule: radius r_s = r0 * phi^s for s in [0, scale_count), each
 * scale backed by a copy of the cloud subsampled at cell size r_s / rho.
 *
 * rho bounds the neighbor count per query: a closed ball of radius r over a
 * grid of cell r/rho intersects at most (2*rho + 2)^3 cells, hence that many
 * subsampled points.
 */
struct ScaleConfig {
  double r0 = 0.1;
  int scale_count = 8;
  double phi = 2.0;
  double rho = 5.0;

  void validate() const {
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw ParameterError("r0 must be positive and finite");
    if (scale_count < 1) throw ParameterError("scale count must be >= 1");
    if (!(phi > 1.0) || !std::isfinite(phi)) throw ParameterError("phi must be > 1 and finite");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be positive and finite");
  }

  std::vector<double> radii() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(scale_count));
    double r = r0;
    for (int s = 0; s < scale_count; ++s) {
      out[static_cast<std::size_t>(s)] = r;
      r *= phi;
    }
    return out;
  }

  std::size_t max_neighbors_bound() const {
    const double side = 2.0 * rho + 2.0;
    return static_cast<std::size_t>(std::ceil(side) * std::ceil(side) * std::ceil(side));
  }

  bool operator==(const ScaleConfig&) const = default;
};

struct PyramidLevel {
  double radius = 0.0;
  double cell_size = 0.0;
  PointCloud cloud;  // subsampled support cloud C_s
  KdTree index;
};

/**
 * Per-scale (radius, subsampled cloud, spatial index) triples over one cloud.
 *
 * All levels share the grid origin (the source cloud's minimum corner), so a
 * pyramid is fully reproducible from (cloud, config). Immutable after build;
 * concurrent queries are safe.
 */
class ScalePyramid {
 public:
  int scale_count() const { return static_cast<int>(levels_.size()); }
  const ScaleConfig& config() const { return cfg_; }
  const Point3& grid_origin() const { return origin_; }
  bool has_colors() const { return !levels_.empty() && levels_.front().cloud.has_colors(); }

  const PyramidLevel& level(int s) const {
    if (s < 0 || s >= scale_count())
      throw ParameterError("scale index " + std::to_string(s) + " out of range");
    return levels_[static_cast<std::size_t>(s)];
  }

  friend ScalePyramid build_pyramid(const PointCloud& cloud, const ScaleConfig& cfg);

 private:
  std::vector<PyramidLevel> levels_;
  ScaleConfig cfg_;
  Point3 origin_;
};

inline ScalePyramid build_pyramid(const PointCloud& cloud, const ScaleConfig& cfg) {
  cfg.validate();
  if (cloud.empty()) throw ParameterError("cannot build a pyramid over an empty cloud");

  ScalePyramid pyr;
  pyr.cfg_ = cfg;
  pyr.origin_ = min_corner(cloud);
  pyr.levels_.reserve(static_cast<std::size_t>(cfg.scale_count));
  for (double radius : cfg.radii()) {
    PyramidLevel level;
    level.radius = radius;
    level.cell_size = radius / cfg.rho;
    level.cloud = grid_subsample(cloud, GridSpec{level.cell_size, pyr.origin_});
    level.index = KdTree(level.cloud);
    pyr.levels_.push_back(std::move(level));
  }
  return pyr;
}

// Indices into level(s).cloud of the subsampled points within the closed
// ball of radius r_s around p0. Never empty when p0 belongs to the source
// cloud and rho >= 1: p0's own cell barycenter is within sqrt(3)/2 * r_s/rho.
inline void neighborhood_indices(const ScalePyramid& pyr, int s, const Point3& p0,
                                 std::vector<std::uint32_t>& out) {
  const PyramidLevel& level = pyr.level(s);
  level.index.radius_query(p0, level.radius, out);
}

inline std::vector<std::uint32_t> neighborhood_indices(const ScalePyramid& pyr, int s,
                                                       const Point3& p0) {
  std::vector<std::uint32_t> out;
  neighborhood_indices(pyr, s, p0, out);
  return out;
}

// Materialized neighborhood: positions (and colors when the cloud has them).
inline PointCloud neighborhood(const ScalePyramid& pyr, int s, const Point3& p0) {
  const PyramidLevel& level = pyr.level(s);
  PointCloud out;
  for (std::uint32_t idx : neighborhood_indices(pyr, s, p0)) {
    out.positions.push_back(level.cloud.positions[idx]);
    if (level.cloud.has_colors()) out.colors.push_back(level.cloud.colors[idx]);
  }
  return out;
}

}  // namespace sphaira
