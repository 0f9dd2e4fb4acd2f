// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sphaira/classify/forest.hpp"
#include "sphaira/classify/sampling.hpp"
#include "sphaira/core/error.hpp"
#include "sphaira/eval/metrics.hpp"

namespace sphaira {

// Per-class IoU mean and standard deviation over repeated train/test trials.
struct TrialStats {
  std::vector<double> class_mean;
  std::vector<double> class_std;
  std::vector<std::size_t> class_defined;  // trials where the class IoU was defined
  double mean_iou_mean = 0.0;
  double mean_iou_std = 0.0;
  std::size_t trials = 0;
};

namespace detail {

// Sample standard deviation (1/(n-1)); 0 when fewer than two values.
inline double sample_std(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace detail

/**
 * The repeated-trial protocol: per trial, draw a balanced training sample
 * with a derived seed, train a forest, predict the complement of the
 * training set, and score per-class IoU. Aggregates mean/std per class and
 * for the mean IoU across trials. Deterministic given (data, config, seed).
 */
inline TrialStats repeated_trials(const Matrix& X, std::span<const Label> y,
                                  const ClassCatalog& catalog, std::size_t n_per_class,
                                  std::size_t trials, const ForestConfig& forest_cfg,
                                  const FeatureFingerprint& fingerprint, std::uint64_t seed,
                                  int threads = 1) {
  if (trials < 2) throw ParameterError("repeated_trials needs at least 2 trials");
  if (X.rows() != y.size()) throw ParameterError("feature rows and label count differ");
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    const Label id = catalog.id_at(c);
    bool present = false;
    for (Label l : y)
      if (l == id) {
        present = true;
        break;
      }
    if (!present)
      throw ParameterError("class " + std::to_string(id) + " absent from the labeled data");
  }

  std::vector<std::vector<double>> per_class_ious(catalog.size());
  std::vector<double> mean_ious;
  mean_ious.reserve(trials);

  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, t);
    const std::vector<std::uint32_t> train_rows =
        balanced_sample(y, n_per_class, catalog.ignored_id(), trial_seed);
    std::vector<char> in_train(y.size(), 0);
    for (std::uint32_t r : train_rows) in_train[r] = 1;

    std::vector<Label> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];
    ForestConfig cfg = forest_cfg;
    cfg.seed = derive_seed(trial_seed, 0xf0);
    const ForestModel model =
        train_forest(X.gather_rows(train_rows), y_train, cfg, fingerprint, threads);

    std::vector<std::uint32_t> test_rows;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!in_train[i] && y[i] != catalog.ignored_id())
        test_rows.push_back(static_cast<std::uint32_t>(i));
    std::vector<Label> y_test(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) y_test[i] = y[test_rows[i]];

    const std::vector<Label> pred = predict(model, X.gather_rows(test_rows), threads);
    const IouReport report = iou_per_class(confusion(y_test, pred, catalog));
    for (std::size_t c = 0; c < catalog.size(); ++c)
      if (report.defined(c)) per_class_ious[c].push_back(report.per_class[c]);
    mean_ious.push_back(report.mean_iou);
  }

  TrialStats stats;
  stats.trials = trials;
  stats.class_mean.resize(catalog.size(), 0.0);
  stats.class_std.resize(catalog.size(), 0.0);
  stats.class_defined.resize(catalog.size(), 0);
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    const auto& values = per_class_ious[c];
    stats.class_defined[c] = values.size();
    if (values.empty()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    stats.class_mean[c] = mean;
    stats.class_std[c] = detail::sample_std(values, mean);
  }
  double mm = 0.0;
  for (double v : mean_ious) mm += v;
  mm /= static_cast<double>(mean_ious.size());
  stats.mean_iou_mean = mm;
  stats.mean_iou_std = detail::sample_std(mean_ious, mm);
  return stats;
}

}  // namespace sphaira
