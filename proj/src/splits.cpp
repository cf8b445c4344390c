#include "iceberg/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "iceberg/rng.hpp"

namespace iceberg {

namespace {

std::vector<std::vector<int>> nodes_by_class(const SparseGraph& graph) {
  std::vector<std::vector<int>> buckets(graph.num_classes);
  for (int i = 0; i < graph.num_nodes; ++i) buckets[graph.labels[i]].push_back(i);
  return buckets;
}

void finalize(const SparseGraph& graph, SplitMasks& masks) {
  std::sort(masks.train_idx.begin(), masks.train_idx.end());
  std::sort(masks.val_idx.begin(), masks.val_idx.end());
  std::sort(masks.test_idx.begin(), masks.test_idx.end());
  masks.labeled_counts.assign(graph.num_classes, 0);
  for (int i : masks.train_idx) ++masks.labeled_counts[graph.labels[i]];
  int lo = masks.labeled_counts.empty() ? 0 : masks.labeled_counts[0];
  int hi = lo;
  for (int c : masks.labeled_counts) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  masks.imbalance_ratio = lo > 0 ? static_cast<double>(hi) / lo : 0.0;
}

// Balanced per-class draw: shuffles each class bucket, takes per_class train
// then val_per_class validation, dumps the remainder in test.
SplitMasks balanced_split(const SparseGraph& graph, int per_class,
                          int val_per_class, std::uint64_t seed) {
  if (per_class < 1) throw std::invalid_argument("split: need at least 1 label per class");
  if (val_per_class < 0) throw std::invalid_argument("split: negative val_per_class");
  SplitMasks masks;
  masks.seed = seed;
  masks.val_per_class = val_per_class;
  Rng rng(seed);
  auto buckets = nodes_by_class(graph);
  for (int c = 0; c < graph.num_classes; ++c) {
    auto& bucket = buckets[c];
    int need = per_class + val_per_class;
    if (static_cast<int>(bucket.size()) < need) {
      throw std::invalid_argument("split: class " + std::to_string(c) + " has " +
                                  std::to_string(bucket.size()) + " nodes, need " +
                                  std::to_string(need));
    }
    rng.shuffle(bucket);
    for (int k = 0; k < need; ++k) {
      (k < per_class ? masks.train_idx : masks.val_idx).push_back(bucket[k]);
    }
    for (std::size_t k = need; k < bucket.size(); ++k) masks.test_idx.push_back(bucket[k]);
  }
  return masks;
}

}  // namespace

SplitMasks make_step_imbalance(const SparseGraph& graph, int base_per_class,
                               double ratio, int val_per_class, std::uint64_t seed) {
  if (ratio < 1.0) throw std::invalid_argument("split: ratio must be >= 1");
  int minority_count = static_cast<int>(std::floor(base_per_class / ratio));
  if (minority_count == 0) throw std::invalid_argument("imbalance ratio too large");

  SplitMasks masks = balanced_split(graph, base_per_class, val_per_class, seed);
  masks.kind = "step";
  masks.base_per_class = base_per_class;
  masks.ratio = ratio;

  // The last floor(C/2) class ids lose train labels down to minority_count.
  // Each class's train nodes were pushed in shuffled order, so keeping the
  // first minority_count of them is a uniform random subset.
  int first_minority = graph.num_classes - graph.num_classes / 2;
  std::vector<int> kept;
  std::vector<int> seen(graph.num_classes, 0);
  for (int i : masks.train_idx) {
    int c = graph.labels[i];
    if (c >= first_minority && seen[c] >= minority_count) {
      masks.test_idx.push_back(i);
    } else {
      kept.push_back(i);
    }
    ++seen[c];
  }
  masks.train_idx = std::move(kept);
  finalize(graph, masks);
  return masks;
}

SplitMasks make_fewshot(const SparseGraph& graph, int labels_per_class,
                        int val_per_class, std::uint64_t seed) {
  SplitMasks masks = balanced_split(graph, labels_per_class, val_per_class, seed);
  masks.kind = "fewshot";
  masks.labels_per_class = labels_per_class;
  finalize(graph, masks);
  return masks;
}

std::vector<int> unlabeled_class_distribution(const SparseGraph& graph,
                                              const SplitMasks& masks) {
  std::vector<char> in_train(graph.num_nodes, 0);
  for (int i : masks.train_idx) in_train[i] = 1;
  std::vector<int> counts(graph.num_classes, 0);
  for (int i = 0; i < graph.num_nodes; ++i) {
    if (!in_train[i]) ++counts[graph.labels[i]];
  }
  return counts;
}

void validate_masks(const SparseGraph& graph, const SplitMasks& masks) {
  std::unordered_set<int> seen;
  auto check_set = [&](const std::vector<int>& idx, const char* name) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= graph.num_nodes) {
        throw std::invalid_argument(std::string("split: ") + name + " index out of range");
      }
      if (k > 0 && idx[k] <= idx[k - 1]) {
        throw std::invalid_argument(std::string("split: ") + name + " not sorted/unique");
      }
      if (!seen.insert(idx[k]).second) {
        throw std::invalid_argument("split: index sets overlap");
      }
    }
  };
  check_set(masks.train_idx, "train");
  check_set(masks.val_idx, "val");
  check_set(masks.test_idx, "test");
  if (static_cast<int>(masks.labeled_counts.size()) != graph.num_classes) {
    throw std::invalid_argument("split: labeled_counts size mismatch");
  }
  std::vector<int> counts(graph.num_classes, 0);
  for (int i : masks.train_idx) ++counts[graph.labels[i]];
  if (counts != masks.labeled_counts) {
    throw std::invalid_argument("split: labeled_counts inconsistent with train_idx");
  }
}

void save_split(const SplitMasks& masks, const std::filesystem::path& path) {
  nlohmann::json j;
  j["kind"] = masks.kind;
  j["base_per_class"] = masks.base_per_class;
  j["ratio"] = masks.ratio;
  j["labels_per_class"] = masks.labels_per_class;
  j["val_per_class"] = masks.val_per_class;
  j["seed"] = masks.seed;
  j["train"] = masks.train_idx;
  j["val"] = masks.val_idx;
  j["test"] = masks.test_idx;
  j["labeled_counts"] = masks.labeled_counts;
  j["imbalance_ratio"] = masks.imbalance_ratio;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

SplitMasks load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  SplitMasks masks;
  try {
    masks.kind = j.at("kind").get<std::string>();
    masks.base_per_class = j.at("base_per_class").get<int>();
    masks.ratio = j.at("ratio").get<double>();
    masks.labels_per_class = j.at("labels_per_class").get<int>();
    masks.val_per_class = j.at("val_per_class").get<int>();
    masks.seed = j.at("seed").get<std::uint64_t>();
    masks.train_idx = j.at("train").get<std::vector<int>>();
    masks.val_idx = j.at("val").get<std::vector<int>>();
    masks.test_idx = j.at("test").get<std::vector<int>>();
    masks.labeled_counts = j.at("labeled_counts").get<std::vector<int>>();
    masks.imbalance_ratio = j.at("imbalance_ratio").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return masks;
}

}  // namespace iceberg
