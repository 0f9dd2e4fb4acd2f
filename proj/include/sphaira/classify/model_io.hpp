// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sphaira/classify/forest.hpp"
#include "sphaira/core/error.hpp"

namespace sphaira {

static_assert(std::endian::native == std::endian::little,
              "model and feature files are little-endian; big-endian hosts are unsupported");

namespace detail {

// Little-endian binary writer/reader for the model file. Doubles round-trip
// bit-exactly, so a reloaded model predicts identically.
class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <class T>
  void value(T v) {
    bytes(&v, sizeof(T));
  }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path);
  }

 private:
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open for reading: " + path);
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ModelError("truncated model file: " + path_);
  }
  template <class T>
  T value() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace detail

inline constexpr char kModelMagic[8] = {'S', 'P', 'H', 'F', 'R', 'S', 'T', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const ForestModel& model, const std::string& path) {
  detail::BinWriter w(path);
  w.bytes(kModelMagic, sizeof(kModelMagic));
  w.value<std::uint32_t>(kModelVersion);

  const FeatureFingerprint& fp = model.fingerprint;
  w.value<std::uint32_t>(fp.dim);
  w.value<std::uint32_t>(fp.scale_count);
  w.value<std::uint32_t>(fp.dims_per_scale);
  w.value<std::uint8_t>(fp.has_colors ? 1 : 0);
  w.value<double>(fp.r0);
  w.value<double>(fp.phi);
  w.value<double>(fp.rho);

  w.value<std::int32_t>(model.config.n_trees);
  w.value<std::int32_t>(model.config.max_depth);
  w.value<std::int32_t>(model.config.min_samples_leaf);
  w.value<std::int32_t>(model.config.features_per_split);
  w.value<std::uint8_t>(model.config.bootstrap ? 1 : 0);
  w.value<std::uint64_t>(model.config.seed);

  w.value<std::uint32_t>(static_cast<std::uint32_t>(model.class_ids.size()));
  for (Label id : model.class_ids) w.value<std::int32_t>(id);

  w.value<std::uint32_t>(static_cast<std::uint32_t>(model.trees.size()));
  for (const DecisionTree& tree : model.trees) {
    w.value<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const DecisionTree::Node& n : tree.nodes) {
      w.value<std::int32_t>(n.feature);
      w.value<double>(n.threshold);
      w.value<std::uint32_t>(n.left);
      w.value<std::uint32_t>(n.right);
      w.value<std::uint32_t>(n.leaf);
    }
    w.value<std::uint64_t>(tree.leaf_probs.size());
    if (!tree.leaf_probs.empty())
      w.bytes(tree.leaf_probs.data(), tree.leaf_probs.size() * sizeof(double));
  }
  w.finish(path);
}

inline ForestModel load_model(const std::string& path) {
  detail::BinReader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw ModelError("not a sphaira model file: " + path);
  const std::uint32_t version = r.value<std::uint32_t>();
  if (version != kModelVersion)
    throw ModelError("unsupported model version " + std::to_string(version));

  ForestModel model;
  FeatureFingerprint& fp = model.fingerprint;
  fp.dim = r.value<std::uint32_t>();
  fp.scale_count = r.value<std::uint32_t>();
  fp.dims_per_scale = r.value<std::uint32_t>();
  fp.has_colors = r.value<std::uint8_t>() != 0;
  fp.r0 = r.value<double>();
  fp.phi = r.value<double>();
  fp.rho = r.value<double>();

  model.config.n_trees = r.value<std::int32_t>();
  model.config.max_depth = r.value<std::int32_t>();
  model.config.min_samples_leaf = r.value<std::int32_t>();
  model.config.features_per_split = r.value<std::int32_t>();
  model.config.bootstrap = r.value<std::uint8_t>() != 0;
  model.config.seed = r.value<std::uint64_t>();

  const std::uint32_t n_classes = r.value<std::uint32_t>();
  model.class_ids.resize(n_classes);
  for (std::uint32_t i = 0; i < n_classes; ++i) model.class_ids[i] = r.value<std::int32_t>();

  const std::uint32_t n_trees = r.value<std::uint32_t>();
  model.trees.resize(n_trees);
  for (DecisionTree& tree : model.trees) {
    const std::uint32_t n_nodes = r.value<std::uint32_t>();
    tree.nodes.resize(n_nodes);
    for (DecisionTree::Node& n : tree.nodes) {
      n.feature = r.value<std::int32_t>();
      n.threshold = r.value<double>();
      n.left = r.value<std::uint32_t>();
      n.right = r.value<std::uint32_t>();
      n.leaf = r.value<std::uint32_t>();
    }
    const std::uint64_t n_probs = r.value<std::uint64_t>();
    tree.leaf_probs.resize(n_probs);
    if (n_probs > 0) r.bytes(tree.leaf_probs.data(), n_probs * sizeof(double));
  }
  return model;
}

}  // namespace sphaira
