// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/matrix.hpp"
#include "sphaira/core/parallel.hpp"
#include "sphaira/core/rng.hpp"
#include "sphaira/features/pyramid.hpp"

namespace sphaira {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 25;
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(dim))
  bool bootstrap = true;
  std::uint64_t seed = 0;

  int resolve_features_per_split(std::size_t dim) const {
    if (features_per_split > 0) return features_per_split;
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
  }

  void validate(std::size_t dim) const {
    if (n_trees < 1) throw ParameterError("n_trees must be >= 1");
    if (max_depth < 1) throw ParameterError("max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ParameterError("min_samples_leaf must be >= 1");
    const int mtry = resolve_features_per_split(dim);
    if (mtry < 1 || static_cast<std::size_t>(mtry) > dim)
      throw ParameterError("features_per_split must be in [1, dim]");
  }
};

// Identifies the feature layout a model was trained on; prediction refuses
// feature matrices with a different layout, since silent column misalignment
// would corrupt every output.
struct FeatureFingerprint {
  std::uint32_t dim = 0;
  std::uint32_t scale_count = 0;
  std::uint32_t dims_per_scale = 0;
  bool has_colors = false;
  double r0 = 0.0;
  double phi = 0.0;
  double rho = 0.0;

  bool operator==(const FeatureFingerprint&) const = default;

  ScaleConfig scale_config() const {
    return ScaleConfig{r0, static_cast<int>(scale_count), phi, rho};
  }

  std::string describe() const {
    return "dim=" + std::to_string(dim) + " scales=" + std::to_string(scale_count) +
           " d=" + std::to_string(dims_per_scale) + (has_colors ? " +colors" : "") +
           " r0=" + std::to_string(r0) + " phi=" + std::to_string(phi) +
           " rho=" + std::to_string(rho);
  }
};

inline FeatureFingerprint make_fingerprint(const ScaleConfig& cfg, bool with_colors) {
  FeatureFingerprint fp;
  fp.scale_count = static_cast<std::uint32_t>(cfg.scale_count);
  fp.dims_per_scale = static_cast<std::uint32_t>(18 + (with_colors ? 6 : 0));
  fp.dim = fp.scale_count * fp.dims_per_scale;
  fp.has_colors = with_colors;
  fp.r0 = cfg.r0;
  fp.phi = cfg.phi;
  fp.rho = cfg.rho;
  return fp;
}

/**
 * One axis-aligned decision tree. Internal nodes route x[feature] < threshold
 * to `left`, otherwise `right`. Leaves index into leaf_probs, which stores
 * one probability row (class histogram normalized to sum 1) per leaf.
 */
struct DecisionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t leaf = 0;  // row into leaf_probs when feature < 0
  };

  std::vector<Node> nodes;
  std::vector<double> leaf_probs;  // n_leaves * n_classes, row-major

  std::span<const double> predict_row(std::span<const double> x, std::size_t n_classes) const {
    std::uint32_t at = 0;
    while (nodes[at].feature >= 0) {
      const auto& n = nodes[at];
      at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return {leaf_probs.data() + nodes[at].leaf * n_classes, n_classes};
  }
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<Label> class_ids;  // ascending
  FeatureFingerprint fingerprint;
  ForestConfig config;

  std::size_t n_classes() const { return class_ids.size(); }
  std::size_t dim() const { return fingerprint.dim; }

  std::size_t class_index(Label id) const {
    const auto it = std::lower_bound(class_ids.begin(), class_ids.end(), id);
    if (it == class_ids.end() || *it != id) throw ParameterError("label not in model classes");
    return static_cast<std::size_t>(it - class_ids.begin());
  }
};

// Gini impurity of a class-count histogram: 1 - sum (c_k / n)^2.
inline double gini_impurity(std::span<const std::uint32_t> counts) {
  std::uint64_t total = 0;
  for (std::uint32_t c : counts) total += c;
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::uint32_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

namespace detail {

struct TreeBuilder {
  const Matrix& x;
  std::span<const std::uint32_t> y;  // internal class indices per training row
  std::size_t n_classes;
  int max_depth;
  int min_samples_leaf;
  int mtry;
  Rng rng;
  DecisionTree tree;

  std::vector<std::uint32_t> feature_perm;
  std::vector<std::pair<double, std::uint32_t>> sorted;  // (value, class)

  TreeBuilder(const Matrix& x_, std::span<const std::uint32_t> y_, std::size_t k, int depth,
              int msl, int mtry_, std::uint64_t seed)
      : x(x_), y(y_), n_classes(k), max_depth(depth), min_samples_leaf(msl), mtry(mtry_),
        rng(seed) {
    feature_perm.resize(x.cols());
    std::iota(feature_perm.begin(), feature_perm.end(), 0u);
  }

  std::uint32_t make_leaf(std::span<const std::uint32_t> samples) {
    std::vector<double> probs(n_classes, 0.0);
    for (std::uint32_t s : samples) probs[y[s]] += 1.0;
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (double& p : probs) p *= inv;
    const std::uint32_t leaf_row =
        static_cast<std::uint32_t>(tree.leaf_probs.size() / n_classes);
    tree.leaf_probs.insert(tree.leaf_probs.end(), probs.begin(), probs.end());
    const std::uint32_t id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].feature = -1;
    tree.nodes[id].leaf = leaf_row;
    return id;
  }

  struct Split {
    bool found = false;
    std::uint32_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Best Gini split over up to mtry non-constant candidate columns, drawn
  // without replacement from a seeded permutation. Constant columns do not
  // count against mtry, so a splittable node is only left unsplit when every
  // remaining distinction is a duplicate-feature label conflict.
  Split find_split(std::span<std::uint32_t> samples, std::span<const std::uint32_t> counts) {
    Split best;
    double best_impurity = 0.0;
    const std::size_t n = samples.size();
    const std::size_t dims = x.cols();

    // Partial Fisher-Yates; positions [0, drawn) hold the candidate order.
    std::size_t drawn = 0;
    int examined = 0;
    while (drawn < dims && examined < mtry) {
      const std::size_t pick = drawn + static_cast<std::size_t>(rng.below(dims - drawn));
      std::swap(feature_perm[drawn], feature_perm[pick]);
      const std::uint32_t col = feature_perm[drawn];
      ++drawn;

      sorted.clear();
      sorted.reserve(n);
      for (std::uint32_t s : samples) sorted.emplace_back(x.at(s, col), y[s]);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted.front().first == sorted.back().first) continue;  // constant: not counted
      ++examined;

      std::vector<std::uint32_t> left(n_classes, 0);
      std::vector<std::uint32_t> right(counts.begin(), counts.end());
      std::uint32_t n_left = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& [value, cls] = sorted[i];
        ++left[cls];
        --right[cls];
        ++n_left;
        if (value == sorted[i + 1].first) continue;
        const std::uint32_t n_right = static_cast<std::uint32_t>(n) - n_left;
        if (n_left < static_cast<std::uint32_t>(min_samples_leaf) ||
            n_right < static_cast<std::uint32_t>(min_samples_leaf))
          continue;
        const double w_impurity =
            (static_cast<double>(n_left) * gini_impurity(left) +
             static_cast<double>(n_right) * gini_impurity(right)) /
            static_cast<double>(n);
        if (!best.found || w_impurity < best_impurity) {
          double threshold = value + (sorted[i + 1].first - value) * 0.5;
          if (threshold <= value) threshold = sorted[i + 1].first;  // adjacent doubles
          best.found = true;
          best.feature = col;
          best.threshold = threshold;
          best_impurity = w_impurity;
        }
      }
    }
    best.impurity = best_impurity;
    return best;
  }

  std::uint32_t build(std::span<std::uint32_t> samples, int depth) {
    std::vector<std::uint32_t> counts(n_classes, 0);
    for (std::uint32_t s : samples) ++counts[y[s]];
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::uint32_t c) { return c > 0; }) <= 1;
    if (pure || depth >= max_depth ||
        samples.size() < 2 * static_cast<std::size_t>(min_samples_leaf))
      return make_leaf(samples);

    const Split split = find_split(samples, counts);
    if (!split.found) return make_leaf(samples);

    const auto boundary = std::partition(samples.begin(), samples.end(), [&](std::uint32_t s) {
      return x.at(s, split.feature) < split.threshold;
    });
    const std::size_t n_left = static_cast<std::size_t>(boundary - samples.begin());
    // Stable content: partition order within sides does not affect leaves
    // (only counts do), but keep sides sorted so the tree is reproducible.
    std::sort(samples.begin(), boundary);
    std::sort(boundary, samples.end());

    const std::uint32_t id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].feature = static_cast<std::int32_t>(split.feature);
    tree.nodes[id].threshold = split.threshold;
    const std::uint32_t left = build(samples.subspan(0, n_left), depth + 1);
    const std::uint32_t right = build(samples.subspan(n_left), depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

}  // namespace detail

/**
 * Trains a random forest: each tree grows on a bootstrap resample (or the
 * full set when bootstrap is off) by recursive greedy Gini splits with
 * midpoint thresholds over randomly sampled candidate columns.
 *
 * Per-tree RNG streams derive from (seed, tree index), so the model is
 * identical for any thread count. Rows of X align with y; y must not contain
 * the ignored class and must have at least two distinct values.
 */
inline ForestModel train_forest(const Matrix& X, std::span<const Label> y,
                                const ForestConfig& cfg, const FeatureFingerprint& fingerprint,
                                int threads = 1) {
  if (X.rows() != y.size()) throw ParameterError("feature rows and label count differ");
  if (X.rows() == 0) throw TrainingError("empty training set");
  if (fingerprint.dim != X.cols())
    throw ParameterError("fingerprint dimension does not match feature matrix");
  cfg.validate(X.cols());

  std::vector<Label> ids(y.begin(), y.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw TrainingError("training labels contain fewer than two classes");

  std::vector<std::uint32_t> y_internal(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(ids.begin(), ids.end(), y[i]);
    y_internal[i] = static_cast<std::uint32_t>(it - ids.begin());
  }

  ForestModel model;
  model.class_ids = std::move(ids);
  model.fingerprint = fingerprint;
  model.config = cfg;
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

  const int mtry = cfg.resolve_features_per_split(X.cols());
  const std::size_t n = X.rows();

  parallel_chunks(model.trees.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t tree_seed = derive_seed(cfg.seed, t);
      detail::TreeBuilder builder(X, y_internal, model.class_ids.size(), cfg.max_depth,
                                  cfg.min_samples_leaf, mtry, derive_seed(tree_seed, 0x7ee5));
      std::vector<std::uint32_t> samples(n);
      if (cfg.bootstrap) {
        Rng boot(derive_seed(tree_seed, 0xb007));
        for (std::size_t i = 0; i < n; ++i)
          samples[i] = static_cast<std::uint32_t>(boot.below(n));
        std::sort(samples.begin(), samples.end());
      } else {
        std::iota(samples.begin(), samples.end(), 0u);
      }
      builder.build(samples, 0);
      model.trees[t] = std::move(builder.tree);
    }
  });
  return model;
}

// Mean of the per-tree leaf probability rows; rows sum to 1 within 1e-9.
inline Matrix predict_proba(const ForestModel& model, const Matrix& X, int threads = 1) {
  if (X.cols() != model.dim())
    throw ModelError("feature dimension " + std::to_string(X.cols()) +
                     " does not match model fingerprint (" + model.fingerprint.describe() + ")");
  const std::size_t k = model.n_classes();
  Matrix out(X.rows(), k);
  const double inv_trees = 1.0 / static_cast<double>(model.trees.size());
  parallel_chunks(X.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::span<const double> row = X.row(i);
      std::span<double> probs = out.row(i);
      for (const DecisionTree& tree : model.trees) {
        std::span<const double> leaf = tree.predict_row(row, k);
        for (std::size_t c = 0; c < k; ++c) probs[c] += leaf[c];
      }
      for (std::size_t c = 0; c < k; ++c) probs[c] *= inv_trees;
    }
  });
  return out;
}

// Argmax of predict_proba rows; ties break toward the smaller class id.
inline std::vector<Label> predict(const ForestModel& model, const Matrix& X, int threads = 1) {
  const Matrix probs = predict_proba(model, X, threads);
  std::vector<Label> out(X.rows());
  parallel_chunks(X.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::span<const double> row = probs.row(i);
      std::size_t best = 0;
      for (std::size_t c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;
      out[i] = model.class_ids[best];
    }
  });
  return out;
}

}  // namespace sphaira
