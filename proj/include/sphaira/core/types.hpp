// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphaira/core/error.hpp"

namespace sphaira {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Point3 operator*(const Point3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

inline double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// Shared by the spatial index and every brute-force check so both sides
// evaluate the exact same IEEE expression.
inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// Color channels are kept in [0,1]; file encodings are rescaled on load.
struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

using Label = std::int32_t;

/**
 * Positions with optional per-point colors and class labels.
 *
 * colors/labels are either empty or exactly positions.size() long. Instances
 * are treated as immutable once built and are safe to share across threads
 * read-only.
 */
struct PointCloud {
  std::vector<Point3> positions;
  std::vector<Rgb> colors;
  std::vector<Label> labels;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_labels() const { return !labels.empty(); }

  // Throws ValidationError if any invariant is violated.
  void validate() const {
    if (has_colors() && colors.size() != positions.size())
      throw ValidationError("color count does not match point count");
    if (has_labels() && labels.size() != positions.size())
      throw ValidationError("label count does not match point count");
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!is_finite(positions[i]))
        throw ValidationError("non-finite coordinate at point " + std::to_string(i));
    }
    for (const Rgb& c : colors) {
      if (!(c.r >= 0.0 && c.r <= 1.0 && c.g >= 0.0 && c.g <= 1.0 && c.b >= 0.0 && c.b <= 1.0))
        throw ValidationError("color channel outside [0,1]");
    }
    for (Label l : labels) {
      if (l < 0) throw ValidationError("negative class label");
    }
  }
};

// Axis-aligned minimum corner; the default grid anchor for subsampling.
inline Point3 min_corner(const PointCloud& cloud) {
  Point3 m{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  for (const Point3& p : cloud.positions) {
    m.x = std::min(m.x, p.x);
    m.y = std::min(m.y, p.y);
    m.z = std::min(m.z, p.z);
  }
  return m;
}

/**
 * Ordered list of scored classes plus one designated ignored id.
 *
 * The ignored id ("unclassified") is excluded from training and scoring and
 * may not appear in the scored list.
 */
class ClassCatalog {
 public:
  ClassCatalog() = default;

  ClassCatalog(std::vector<std::pair<Label, std::string>> classes, Label ignored_id)
      : classes_(std::move(classes)), ignored_(ignored_id) {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      if (classes_[i].first == ignored_)
        throw ParameterError("ignored id listed as a scored class");
      if (classes_[i].first < 0) throw ParameterError("negative class id");
      for (std::size_t j = i + 1; j < classes_.size(); ++j) {
        if (classes_[i].first == classes_[j].first)
          throw ParameterError("duplicate class id " + std::to_string(classes_[i].first));
      }
    }
  }

  // Builds a catalog from the distinct non-ignored labels, ascending,
  // with placeholder names.
  static ClassCatalog from_labels(std::span<const Label> labels, Label ignored_id) {
    std::vector<Label> ids(labels.begin(), labels.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::pair<Label, std::string>> classes;
    for (Label id : ids) {
      if (id == ignored_id) continue;
      classes.emplace_back(id, "class_" + std::to_string(id));
    }
    return ClassCatalog(std::move(classes), ignored_id);
  }

  std::size_t size() const { return classes_.size(); }
  Label ignored_id() const { return ignored_; }

  Label id_at(std::size_t index) const { return classes_.at(index).first; }
  const std::string& name_at(std::size_t index) const { return classes_.at(index).second; }

  std::optional<std::size_t> index_of(Label id) const {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i].first == id) return i;
    return std::nullopt;
  }

  bool contains(Label id) const { return index_of(id).has_value(); }

  const std::vector<std::pair<Label, std::string>>& entries() const { return classes_; }

 private:
  std::vector<std::pair<Label, std::string>> classes_;
  Label ignored_ = 0;
};

}  // namespace sphaira
