// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sphaira/classify/forest.hpp"
#include "sphaira/core/error.hpp"
#include "sphaira/core/rng.hpp"

namespace sphaira {

namespace detail {

// First n entries of a seeded uniform permutation of pool, without
// replacement (partial Fisher-Yates).
inline std::vector<std::uint32_t> draw_without_replacement(std::vector<std::uint32_t>& pool,
                                                           std::size_t n, Rng& rng) {
  n = std::min(n, pool.size());
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[pick]);
  }
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace detail

/**
 * Uniform sample without replacement of min(n_per_class, class size) row
 * indices per non-ignored class. Classes are processed in ascending id order
 * with an independent derived RNG stream each, so the result is deterministic
 * given the seed. Indices come back sorted within each class block.
 */
inline std::vector<std::uint32_t> balanced_sample(std::span<const Label> labels,
                                                  std::size_t n_per_class, Label ignored_id,
                                                  std::uint64_t seed) {
  if (labels.empty()) throw ParameterError("balanced_sample needs labels");
  std::map<Label, std::vector<std::uint32_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == ignored_id) continue;
    by_class[labels[i]].push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<std::uint32_t> out;
  for (auto& [cls, pool] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    std::vector<std::uint32_t> picked = detail::draw_without_replacement(pool, n_per_class, rng);
    std::sort(picked.begin(), picked.end());
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

struct MiningConfig {
  std::size_t initial_per_class = 1000;
  int rounds = 5;
  std::size_t add_per_round = 0;  // 0 = budget / 10
  std::size_t budget = 50000;
  std::uint64_t seed = 0;

  std::size_t resolve_add_per_round() const {
    return add_per_round > 0 ? add_per_round : budget / 10;
  }

  void validate() const {
    if (initial_per_class < 1) throw ParameterError("initial_per_class must be >= 1");
    if (rounds < 0) throw ParameterError("rounds must be >= 0");
    if (budget < 1) throw ParameterError("budget must be >= 1");
  }
};

struct MiningRound {
  std::size_t training_size = 0;
  std::size_t misclassified = 0;  // over all labeled training points
  std::size_t added = 0;
};

struct MiningResult {
  ForestModel model;
  std::vector<std::uint32_t> selected;  // final training set T, sorted
  std::vector<MiningRound> rounds;
};

/**
 * Iterative trial-and-error training-set construction: start from a balanced
 * sample, repeatedly retrain, score all labeled points, and add a random
 * draw of misclassified points (proportional per class to the error counts,
 * keeping the selection balanced in spirit) until the error pool is empty,
 * the budget is reached, or the round limit is hit.
 *
 * The returned model is always trained on the returned set. Rows labeled
 * with the ignored id never enter the set or the error pool.
 */
inline MiningResult mine_training_set(const Matrix& X, std::span<const Label> y,
                                      Label ignored_id, const ForestConfig& forest_cfg,
                                      const MiningConfig& mining_cfg,
                                      const FeatureFingerprint& fingerprint, int threads = 1) {
  mining_cfg.validate();
  if (X.rows() != y.size()) throw ParameterError("feature rows and label count differ");

  std::vector<std::uint32_t> eligible;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != ignored_id) eligible.push_back(static_cast<std::uint32_t>(i));
  if (eligible.empty()) throw ParameterError("no labeled points to mine from");

  std::vector<std::uint32_t> selected =
      balanced_sample(y, mining_cfg.initial_per_class, ignored_id, derive_seed(mining_cfg.seed, 0));
  std::sort(selected.begin(), selected.end());
  if (selected.size() > mining_cfg.budget)
    throw ParameterError("mining budget smaller than the initial balanced sample");

  std::vector<char> in_set(y.size(), 0);
  for (std::uint32_t s : selected) in_set[s] = 1;

  auto train_on_selection = [&]() {
    std::vector<Label> y_sel(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) y_sel[i] = y[selected[i]];
    return train_forest(X.gather_rows(selected), y_sel, forest_cfg, fingerprint, threads);
  };

  MiningResult result;
  result.model = train_on_selection();
  const std::size_t add_n = mining_cfg.resolve_add_per_round();
  const Matrix x_all = mining_cfg.rounds > 0 ? X.gather_rows(eligible) : Matrix();

  for (int round = 0; round < mining_cfg.rounds; ++round) {
    const std::vector<Label> pred = predict(result.model, x_all, threads);

    // Misclassified candidates not already selected, grouped by true class.
    std::map<Label, std::vector<std::uint32_t>> errors_by_class;
    std::size_t total_errors = 0;
    std::size_t candidate_count = 0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      const std::uint32_t row = eligible[i];
      if (pred[i] == y[row]) continue;
      ++total_errors;
      if (in_set[row]) continue;
      errors_by_class[y[row]].push_back(row);
      ++candidate_count;
    }
    result.rounds.push_back({selected.size(), total_errors, 0});

    const std::size_t room = mining_cfg.budget - selected.size();
    if (candidate_count == 0 || room == 0) break;
    const std::size_t to_add = std::min({add_n, room, candidate_count});

    // Largest-remainder allocation proportional to per-class error mass,
    // capped by availability; leftovers are redistributed in id order.
    std::vector<std::pair<Label, std::size_t>> alloc;
    {
      std::vector<std::pair<double, Label>> remainders;
      std::size_t assigned = 0;
      for (const auto& [cls, rows] : errors_by_class) {
        const double share = static_cast<double>(to_add) *
                             (static_cast<double>(rows.size()) /
                              static_cast<double>(candidate_count));
        const std::size_t base = static_cast<std::size_t>(share);
        alloc.emplace_back(cls, base);
        assigned += base;
        remainders.emplace_back(share - static_cast<double>(base), cls);
      }
      std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (std::size_t i = 0; assigned < to_add && i < remainders.size(); ++i) {
        for (auto& [cls, n] : alloc)
          if (cls == remainders[i].second) {
            ++n;
            ++assigned;
            break;
          }
      }
      for (auto& [cls, n] : alloc) n = std::min(n, errors_by_class[cls].size());
      std::size_t given = 0;
      for (const auto& [cls, n] : alloc) given += n;
      // Capacity freed by capped classes goes to classes that still have
      // candidates, ascending id, until to_add is met or nothing is left.
      bool progressed = true;
      while (given < to_add && progressed) {
        progressed = false;
        for (auto& [cls, n] : alloc) {
          if (given >= to_add) break;
          if (n < errors_by_class[cls].size()) {
            ++n;
            ++given;
            progressed = true;
          }
        }
      }
    }

    Rng rng(derive_seed(mining_cfg.seed, 0x1000 + static_cast<std::uint64_t>(round)));
    std::size_t added = 0;
    for (const auto& [cls, n] : alloc) {
      std::vector<std::uint32_t>& pool = errors_by_class[cls];
      for (std::uint32_t row : detail::draw_without_replacement(pool, n, rng)) {
        selected.push_back(row);
        in_set[row] = 1;
        ++added;
      }
    }
    result.rounds.back().added = added;
    if (added == 0) break;
    std::sort(selected.begin(), selected.end());
    result.model = train_on_selection();
  }

  result.selected = std::move(selected);
  return result;
}

}  // namespace sphaira
