// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/types.hpp"

namespace sphaira {

/**
 * K x K counts over the catalog's scored classes: entry (i, j) counts points
 * of ground-truth class i predicted as class j. Points whose ground truth is
 * the ignored id are excluded; every other point is counted exactly once, so
 * total() equals the number of scored points.
 */
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t k() const { return k_; }

  std::int64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * k_ + pred]; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }

  std::int64_t row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) s += at(i, j);
    return s;
  }
  std::int64_t col_sum(std::size_t j) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, j);
    return s;
  }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (std::int64_t c : counts_) s += c;
    return s;
  }

 private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> pred,
                                 const ClassCatalog& catalog) {
  if (truth.size() != pred.size())
    throw ParameterError("truth and prediction lengths differ");
  ConfusionMatrix cm(catalog.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == catalog.ignored_id()) continue;
    const auto ti = catalog.index_of(truth[i]);
    if (!ti) throw ParameterError("truth label " + std::to_string(truth[i]) + " not in catalog");
    const auto pi = catalog.index_of(pred[i]);
    if (!pi)
      throw ParameterError("predicted label " + std::to_string(pred[i]) + " not in catalog");
    ++cm.at(*ti, *pi);
  }
  return cm;
}

/**
 * Per-class intersection-over-union and its mean.
 *
 * IoU_i = cm(i,i) / (row_i + col_i - cm(i,i)). A class absent from both
 * truth and prediction has an undefined IoU, reported as NaN and excluded
 * from the mean.
 */
struct IouReport {
  std::vector<double> per_class;  // NaN = undefined
  double mean_iou = std::numeric_limits<double>::quiet_NaN();
  std::size_t defined_count = 0;

  bool defined(std::size_t i) const { return !std::isnan(per_class[i]); }
};

inline IouReport iou_per_class(const ConfusionMatrix& cm) {
  IouReport report;
  report.per_class.resize(cm.k(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (std::size_t i = 0; i < cm.k(); ++i) {
    const std::int64_t tp = cm.at(i, i);
    const std::int64_t denom = cm.row_sum(i) + cm.col_sum(i) - tp;
    if (denom == 0) continue;  // absent from truth and prediction
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    report.per_class[i] = iou;
    sum += iou;
    ++report.defined_count;
  }
  if (report.defined_count > 0) report.mean_iou = sum / static_cast<double>(report.defined_count);
  return report;
}

// IoU = F1 / (2 - F1); the exact inverse of F1 = 2*IoU / (1 + IoU).
inline double f1_to_iou(double f1) {
  if (!(f1 >= 0.0 && f1 <= 1.0)) throw ParameterError("F1 score must lie in [0,1]");
  return f1 / (2.0 - f1);
}

inline void save_metrics_csv(const IouReport& report, const ClassCatalog& catalog,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "class_id,class_name,iou\n";
  char buf[64];
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (report.defined(i)) {
      std::snprintf(buf, sizeof(buf), "%.9f", report.per_class[i]);
      out << catalog.id_at(i) << ',' << catalog.name_at(i) << ',' << buf << '\n';
    } else {
      out << catalog.id_at(i) << ',' << catalog.name_at(i) << ",nan\n";
    }
  }
  std::snprintf(buf, sizeof(buf), "%.9f", report.mean_iou);
  out << "mean,," << (report.defined_count > 0 ? buf : "nan") << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::string format_metrics_table(const IouReport& report, const ClassCatalog& catalog) {
  std::ostringstream out;
  char buf[64];
  out << "  id  class                 IoU\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%4d  %-18s", catalog.id_at(i), catalog.name_at(i).c_str());
    out << buf;
    if (report.defined(i)) {
      std::snprintf(buf, sizeof(buf), "%8.4f\n", report.per_class[i]);
      out << buf;
    } else {
      out << "   undef\n";
    }
  }
  std::snprintf(buf, sizeof(buf), "      %-18s%8.4f\n", "mean", report.mean_iou);
  out << buf;
  return out.str();
}

}  // namespace sphaira
