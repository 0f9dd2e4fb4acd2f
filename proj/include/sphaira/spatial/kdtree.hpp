// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/types.hpp"

namespace sphaira {

/**
 * Immutable kd-tree answering exact fixed-radius queries.
 *
 * A query returns exactly the indices of the points inside the closed ball
 * { p : ||p - q|| <= r }, ascending. Membership is decided by the same
 * squared-distance expression a linear scan would use, so results agree with
 * brute force bit for bit; internal pruning only ever widens the visited
 * region. Safe for concurrent queries from many threads.
 */
class KdTree {
 public:
  KdTree() = default;

  explicit KdTree(std::span<const Point3> points) { build(points); }
  explicit KdTree(const PointCloud& cloud) { build(cloud.positions); }

  std::size_t size() const { return points_.size(); }

  std::vector<std::uint32_t> radius_query(const Point3& center, double radius) const {
    std::vector<std::uint32_t> out;
    radius_query(center, radius, out);
    return out;
  }

  // Scratch-buffer variant for hot loops; `out` is cleared first.
  void radius_query(const Point3& center, double radius, std::vector<std::uint32_t>& out) const {
    if (!(radius >= 0.0) || !std::isfinite(radius))
      throw ParameterError("query radius must be finite and non-negative");
    out.clear();
    if (nodes_.empty()) return;
    const double r2 = radius * radius;
    // Multiplicative slack keeps axis-gap pruning conservative under
    // rounding; the leaf-level distance test is exact.
    const double bound = radius * (1.0 + 1e-13);
    collect(0, center, r2, bound, out);
    std::sort(out.begin(), out.end());
  }

 private:
  struct Node {
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int8_t axis = -1;  // -1 marks a leaf
  };

  static constexpr std::size_t kLeafSize = 16;

  static double coord(const Point3& p, int axis) {
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
  }

  void build(std::span<const Point3> points) {
    points_.assign(points.begin(), points.end());
    ids_.resize(points_.size());
    std::iota(ids_.begin(), ids_.end(), 0u);
    if (points_.empty()) return;
    nodes_.reserve(points_.size() / kLeafSize * 2 + 2);
    std::vector<Point3> source = points_;
    build_node(source, 0, static_cast<std::uint32_t>(points_.size()));
    for (std::size_t i = 0; i < ids_.size(); ++i) points_[i] = source[ids_[i]];
  }

  std::uint32_t build_node(const std::vector<Point3>& source, std::uint32_t begin,
                           std::uint32_t end) {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }

    // Split along the widest extent of the range's bounding box.
    Point3 lo = source[ids_[begin]], hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      const Point3& p = source[ids_[i]];
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      lo.z = std::min(lo.z, p.z);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
      hi.z = std::max(hi.z, p.z);
    }
    const double ex = hi.x - lo.x, ey = hi.y - lo.y, ez = hi.z - lo.z;
    int axis = 0;
    double extent = ex;
    if (ey > extent) {
      axis = 1;
      extent = ey;
    }
    if (ez > extent) axis = 2;

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return coord(source[a], axis) < coord(source[b], axis);
                     });

    // Left holds coordinates <= split, right holds >= split (the median
    // point itself starts the right range).
    nodes_[id].axis = static_cast<std::int8_t>(axis);
    nodes_[id].split = coord(source[ids_[mid]], axis);
    const std::uint32_t left = build_node(source, begin, mid);
    const std::uint32_t right = build_node(source, mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void collect(std::uint32_t node_id, const Point3& center, double r2, double bound,
               std::vector<std::uint32_t>& out) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (squared_distance(points_[i], center) <= r2) out.push_back(ids_[i]);
      }
      return;
    }
    const double c = coord(center, node.axis);
    if (c - node.split <= bound) collect(node.left, center, r2, bound, out);
    if (node.split - c <= bound) collect(node.right, center, r2, bound, out);
  }

  std::vector<Point3> points_;          // indexed points, tree order
  std::vector<std::uint32_t> ids_;      // tree order -> original index
  std::vector<Node> nodes_;
};

}  // namespace sphaira
