// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sphaira/classify/forest.hpp"
#include "sphaira/classify/sampling.hpp"
#include "sphaira/core/error.hpp"
#include "sphaira/eval/metrics.hpp"
#include "sphaira/features/compute.hpp"

namespace sphaira {

struct SweepPoint {
  double rho = 0.0;
  double mean_iou = 0.0;
  double points_per_second = 0.0;  // test-cloud feature extraction throughput
};

struct SweepProtocol {
  ScaleConfig base;  // rho is replaced per sweep value
  ForestConfig forest;
  std::size_t n_per_class = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/**
 * Density-parameter study: for each rho, rebuild the pyramids, train on a
 * balanced sample of the training cloud, evaluate on the test cloud, and
 * record mean IoU plus the measured feature-extraction throughput.
 *
 * The training sample is drawn once (independent of rho), so rows differ
 * only in the neighborhood density.
 */
inline std::vector<SweepPoint> rho_sweep(const PointCloud& train_cloud,
                                         const PointCloud& test_cloud,
                                         const ClassCatalog& catalog,
                                         std::span<const double> rho_values,
                                         const SweepProtocol& protocol) {
  if (!train_cloud.has_labels() || !test_cloud.has_labels())
    throw ParameterError("rho_sweep needs labeled train and test clouds");
  for (double rho : rho_values)
    if (!(rho > 0.0)) throw ParameterError("rho values must be positive");

  const std::vector<std::uint32_t> train_rows = balanced_sample(
      train_cloud.labels, protocol.n_per_class, catalog.ignored_id(), derive_seed(protocol.seed, 1));
  std::vector<Label> y_train(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i)
    y_train[i] = train_cloud.labels[train_rows[i]];

  std::vector<SweepPoint> out;
  for (double rho : rho_values) {
    ScaleConfig cfg = protocol.base;
    cfg.rho = rho;

    const ScalePyramid train_pyr = build_pyramid(train_cloud, cfg);
    const FeatureMatrix x_train =
        extract_features(train_cloud, train_pyr, train_rows, protocol.threads);
    ForestConfig forest_cfg = protocol.forest;
    forest_cfg.seed = derive_seed(protocol.seed, 2);
    const ForestModel model = train_forest(x_train, y_train, forest_cfg,
                                           make_fingerprint(cfg, train_pyr.has_colors()),
                                           protocol.threads);

    const ScalePyramid test_pyr = build_pyramid(test_cloud, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const FeatureMatrix x_test = extract_features_all(test_cloud, test_pyr, protocol.threads);
    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();

    const std::vector<Label> pred = predict(model, x_test, protocol.threads);
    const IouReport report = iou_per_class(confusion(test_cloud.labels, pred, catalog));

    SweepPoint point;
    point.rho = rho;
    point.mean_iou = report.mean_iou;
    point.points_per_second =
        seconds > 0.0 ? static_cast<double>(test_cloud.size()) / seconds : 0.0;
    out.push_back(point);
  }
  return out;
}

inline void save_sweep_csv(std::span<const SweepPoint> points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "rho,mean_iou,points_per_second\n";
  char buf[96];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.9f,%.1f\n", p.rho, p.mean_iou, p.points_per_second);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

// Whitespace-separated variant for plotting tools.
inline void save_sweep_dat(std::span<const SweepPoint> points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# rho mean_iou points_per_second\n";
  char buf[96];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6g %.9f %.1f\n", p.rho, p.mean_iou, p.points_per_second);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sphaira
