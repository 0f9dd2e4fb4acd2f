// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/rng.hpp"
#include "sphaira/core/types.hpp"

namespace sphaira {

/**
 * Axis-aligned voxel grid: cubic cells of edge cell_size anchored at origin.
 *
 * A point belongs to cell floor((p - origin) / cell_size), component-wise.
 * Points exactly on a cell boundary therefore fall in the higher-index cell.
 */
struct GridSpec {
  double cell_size = 1.0;
  Point3 origin{};

  void validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
      throw ParameterError("grid cell size must be positive and finite");
    if (!is_finite(origin)) throw ParameterError("grid origin must be finite");
  }
};

struct VoxelKey {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

inline VoxelKey voxel_key_of(const Point3& p, const GridSpec& grid) {
  return {static_cast<std::int64_t>(std::floor((p.x - grid.origin.x) / grid.cell_size)),
          static_cast<std::int64_t>(std::floor((p.y - grid.origin.y) / grid.cell_size)),
          static_cast<std::int64_t>(std::floor((p.z - grid.origin.z) / grid.cell_size))};
}

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& key) const {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(key.i));
    h = mix64(h ^ static_cast<std::uint64_t>(key.j));
    h = mix64(h ^ static_cast<std::uint64_t>(key.k));
    return static_cast<std::size_t>(h);
  }
};

/**
 * Replaces all points in each non-empty voxel by their barycenter.
 *
 * Colors, when present, are averaged the same way. Labels are dropped: the
 * output is a feature-support cloud, classification always targets the
 * original points. Output order is ascending lexicographic (i, j, k), so the
 * result is deterministic.
 */
inline PointCloud grid_subsample(const PointCloud& cloud, const GridSpec& grid) {
  grid.validate();

  struct Accum {
    double sx = 0, sy = 0, sz = 0;
    double sr = 0, sg = 0, sb = 0;
    std::uint64_t n = 0;
  };

  const bool with_colors = cloud.has_colors();
  std::unordered_map<VoxelKey, Accum, VoxelKeyHash> cells;
  cells.reserve(cloud.size());
  for (std::size_t idx = 0; idx < cloud.size(); ++idx) {
    const Point3& p = cloud.positions[idx];
    Accum& a = cells[voxel_key_of(p, grid)];
    a.sx += p.x;
    a.sy += p.y;
    a.sz += p.z;
    if (with_colors) {
      const Rgb& c = cloud.colors[idx];
      a.sr += c.r;
      a.sg += c.g;
      a.sb += c.b;
    }
    a.n += 1;
  }

  std::vector<std::pair<VoxelKey, Accum>> ordered(cells.begin(), cells.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  PointCloud out;
  out.positions.reserve(ordered.size());
  if (with_colors) out.colors.reserve(ordered.size());
  for (const auto& [key, a] : ordered) {
    const double inv = 1.0 / static_cast<double>(a.n);
    out.positions.push_back({a.sx * inv, a.sy * inv, a.sz * inv});
    if (with_colors) out.colors.push_back({a.sr * inv, a.sg * inv, a.sb * inv});
  }
  return out;
}

}  // namespace sphaira
