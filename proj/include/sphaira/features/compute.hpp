// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/matrix.hpp"
#include "sphaira/core/parallel.hpp"
#include "sphaira/core/types.hpp"
#include "sphaira/features/eigen3.hpp"
#include "sphaira/features/pyramid.hpp"

namespace sphaira {

inline constexpr int kGeometricFeatureCount = 18;
inline constexpr int kColorFeatureCount = 6;

inline int features_per_scale(bool with_colors) {
  return kGeometricFeatureCount + (with_colors ? kColorFeatureCount : 0);
}

// Population covariance (1/N normalization) about the neighborhood centroid.
inline SymMat3 covariance(std::span<const Point3> points) {
  if (points.empty()) throw ParameterError("covariance of an empty neighborhood");
  const double inv = 1.0 / static_cast<double>(points.size());
  double cx = 0, cy = 0, cz = 0;
  for (const Point3& p : points) {
    cx += p.x;
    cy += p.y;
    cz += p.z;
  }
  cx *= inv;
  cy *= inv;
  cz *= inv;

  SymMat3 m;
  for (const Point3& p : points) {
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    const double dz = p.z - cz;
    m.xx += dx * dx;
    m.xy += dx * dy;
    m.xz += dx * dz;
    m.yy += dy * dy;
    m.yz += dy * dz;
    m.zz += dz * dz;
  }
  m.xx *= inv;
  m.xy *= inv;
  m.xz *= inv;
  m.yy *= inv;
  m.yz *= inv;
  m.zz *= inv;
  return m;
}

namespace detail {

// |pi/2 - angle(e, e_z)| for a unit-length e, computed as the complementary
// angle directly; well-conditioned for both horizontal and vertical vectors.
inline double verticality_of(const std::array<double, 3>& e) {
  return std::atan2(std::fabs(e[2]), std::sqrt(e[0] * e[0] + e[1] * e[1]));
}

}  // namespace detail

/**
 * The 18 geometric descriptors of one neighborhood at one scale, in order:
 *
 *   0 eigen_sum        lambda1 + lambda2 + lambda3
 *   1 omnivariance     (lambda1 * lambda2 * lambda3)^(1/3)
 *   2 eigenentropy     -sum lambda_i * ln(lambda_i), with 0*ln(0) = 0
 *   3 linearity        (lambda1 - lambda2) / lambda1
 *   4 planarity        (lambda2 - lambda3) / lambda1
 *   5 sphericity       lambda3 / lambda1
 *   6 curvature_change lambda3 / (lambda1 + lambda2 + lambda3)
 *   7 verticality_e1   |pi/2 - angle(e1, e_z)|
 *   8 verticality_e3   |pi/2 - angle(e3, e_z)|
 *   9-11 moment1_e1..e3   |sum <p - p0, e_i>| / N
 *  12-14 moment2_e1..e3   |sum <p - p0, e_i>^2| / N
 *  15 vertical_moment1    sum <p - p0, e_z> / N   (signed)
 *  16 vertical_moment2    sum <p - p0, e_z>^2 / N
 *  17 point_count         N
 *
 * Eigenvalues enter raw (unnormalized), so eigenentropy may be negative.
 * Ratio features are 0 when lambda1 = 0 (fewer than two distinct points);
 * both verticalities are 0 in that case as well, since the basis carries no
 * information. Moments are centered at the query point p0, not the centroid.
 * No input produces NaN.
 */
inline void geometric_features(std::span<const Point3> neigh, const Point3& p0,
                               const EigenTriple& eig, std::span<double> out) {
  if (neigh.empty()) throw ParameterError("geometric features of an empty neighborhood");
  if (out.size() < static_cast<std::size_t>(kGeometricFeatureCount))
    throw ParameterError("feature output span too small");

  const double l1 = eig.values[0];
  const double l2 = eig.values[1];
  const double l3 = eig.values[2];
  const double sum = l1 + l2 + l3;

  out[0] = sum;
  out[1] = std::cbrt(l1 * l2 * l3);
  double entropy = 0.0;
  for (double l : eig.values)
    if (l > 0.0) entropy -= l * std::log(l);
  out[2] = entropy;
  if (l1 > 0.0) {
    out[3] = (l1 - l2) / l1;
    out[4] = (l2 - l3) / l1;
    out[5] = l3 / l1;
    out[7] = detail::verticality_of(eig.vectors[0]);
    out[8] = detail::verticality_of(eig.vectors[2]);
  } else {
    out[3] = out[4] = out[5] = 0.0;
    out[7] = out[8] = 0.0;
  }
  out[6] = sum > 0.0 ? l3 / sum : 0.0;

  const std::array<double, 3>& e1 = eig.vectors[0];
  const std::array<double, 3>& e2 = eig.vectors[1];
  const std::array<double, 3>& e3 = eig.vectors[2];
  double m1[3] = {0, 0, 0};
  double m2[3] = {0, 0, 0};
  double vz1 = 0.0, vz2 = 0.0;
  for (const Point3& p : neigh) {
    const double dx = p.x - p0.x;
    const double dy = p.y - p0.y;
    const double dz = p.z - p0.z;
    const double d1 = dx * e1[0] + dy * e1[1] + dz * e1[2];
    const double d2 = dx * e2[0] + dy * e2[1] + dz * e2[2];
    const double d3 = dx * e3[0] + dy * e3[1] + dz * e3[2];
    m1[0] += d1;
    m1[1] += d2;
    m1[2] += d3;
    m2[0] += d1 * d1;
    m2[1] += d2 * d2;
    m2[2] += d3 * d3;
    vz1 += dz;
    vz2 += dz * dz;
  }
  const double inv = 1.0 / static_cast<double>(neigh.size());
  for (int i = 0; i < 3; ++i) {
    out[9 + i] = std::fabs(m1[i]) * inv;
    out[12 + i] = std::fabs(m2[i]) * inv;
  }
  out[15] = vz1 * inv;
  out[16] = vz2 * inv;
  out[17] = static_cast<double>(neigh.size());
}

// Per-channel mean and sample variance (1/(N-1)); variance is 0 for N = 1.
inline void color_features(std::span<const Rgb> colors, std::span<double> out) {
  if (colors.empty()) throw ParameterError("color features of an empty neighborhood");
  if (out.size() < static_cast<std::size_t>(kColorFeatureCount))
    throw ParameterError("feature output span too small");
  const std::size_t n = colors.size();
  double mr = 0, mg = 0, mb = 0;
  for (const Rgb& c : colors) {
    mr += c.r;
    mg += c.g;
    mb += c.b;
  }
  mr /= static_cast<double>(n);
  mg /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  out[0] = mr;
  out[1] = mg;
  out[2] = mb;
  if (n < 2) {
    out[3] = out[4] = out[5] = 0.0;
    return;
  }
  double vr = 0, vg = 0, vb = 0;
  for (const Rgb& c : colors) {
    vr += (c.r - mr) * (c.r - mr);
    vg += (c.g - mg) * (c.g - mg);
    vb += (c.b - mb) * (c.b - mb);
  }
  const double bessel = 1.0 / static_cast<double>(n - 1);
  out[3] = vr * bessel;
  out[4] = vg * bessel;
  out[5] = vb * bessel;
}

inline std::vector<std::string> feature_names(bool with_colors) {
  std::vector<std::string> names = {
      "eigen_sum",     "omnivariance", "eigenentropy",     "linearity",        "planarity",
      "sphericity",    "curvature_change", "verticality_e1", "verticality_e3", "moment1_e1",
      "moment1_e2",    "moment1_e3",   "moment2_e1",       "moment2_e2",       "moment2_e3",
      "vertical_moment1", "vertical_moment2", "point_count"};
  if (with_colors) {
    for (const char* n : {"mean_r", "mean_g", "mean_b", "var_r", "var_g", "var_b"})
      names.emplace_back(n);
  }
  return names;
}

// Column names of a full feature matrix, scale-major: s0_*, s1_*, ...
inline std::vector<std::string> feature_column_names(int scale_count, bool with_colors) {
  const std::vector<std::string> base = feature_names(with_colors);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(scale_count) * base.size());
  for (int s = 0; s < scale_count; ++s)
    for (const std::string& n : base) out.push_back("s" + std::to_string(s) + "_" + n);
  return out;
}

/**
 * Feature matrix for the given query points: row i concatenates the
 * per-scale feature vectors of query_indices[i] over all pyramid scales
 * (scale 0 block first).
 *
 * Rows are computed independently and written to disjoint storage, so the
 * result is bit-identical for any thread count. A query landing in an empty
 * neighborhood (only possible when the query is not a point of the pyramid's
 * source cloud) yields a zero block.
 */
inline FeatureMatrix extract_features(const PointCloud& cloud, const ScalePyramid& pyramid,
                                      std::span<const std::uint32_t> query_indices,
                                      int threads = 1) {
  for (std::uint32_t q : query_indices)
    if (q >= cloud.size()) throw ParameterError("query index out of range");

  const bool with_colors = pyramid.has_colors();
  const int d = features_per_scale(with_colors);
  const int scales = pyramid.scale_count();
  FeatureMatrix out(query_indices.size(), static_cast<std::size_t>(scales * d));

  parallel_chunks(query_indices.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> nidx;
    std::vector<Point3> npos;
    std::vector<Rgb> ncol;
    for (std::size_t i = begin; i < end; ++i) {
      const Point3& p0 = cloud.positions[query_indices[i]];
      std::span<double> row = out.row(i);
      for (int s = 0; s < scales; ++s) {
        const PyramidLevel& level = pyramid.level(s);
        level.index.radius_query(p0, level.radius, nidx);
        std::span<double> block = row.subspan(static_cast<std::size_t>(s) * d,
                                              static_cast<std::size_t>(d));
        if (nidx.empty()) continue;  // already zero
        npos.clear();
        for (std::uint32_t idx : nidx) npos.push_back(level.cloud.positions[idx]);
        const EigenTriple eig = eigen_symmetric3(covariance(npos));
        geometric_features(npos, p0, eig, block);
        if (with_colors) {
          ncol.clear();
          for (std::uint32_t idx : nidx) ncol.push_back(level.cloud.colors[idx]);
          color_features(ncol, block.subspan(kGeometricFeatureCount));
        }
      }
    }
  });
  return out;
}

// Convenience: features for every point of the cloud.
inline FeatureMatrix extract_features_all(const PointCloud& cloud, const ScalePyramid& pyramid,
                                          int threads = 1) {
  std::vector<std::uint32_t> all(cloud.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  return extract_features(cloud, pyramid, all, threads);
}

}  // namespace sphaira
