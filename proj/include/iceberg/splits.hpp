#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iceberg/graph.hpp"

namespace iceberg {

// Labeled/validation/test partition. Index sets are kept sorted and are
// pairwise disjoint; nodes in none of the sets do not exist by construction
// (test absorbs the remainder).
struct SplitMasks {
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::vector<int> test_idx;
  std::vector<int> labeled_counts;  // per-class counts over train_idx
  double imbalance_ratio = 1.0;     // max/min labeled count when all > 0

  // Parameters that generated the split, for serialization.
  std::string kind;  // "step" or "fewshot"
  int base_per_class = 0;
  double ratio = 1.0;
  int labels_per_class = 0;
  int val_per_class = 0;
  std::uint64_t seed = 0;
};

// Balanced draw of base_per_class train + val_per_class val labels per class,
// then the last floor(C/2) class ids are cut down to floor(base_per_class /
// ratio) train labels each; removed nodes join the test pool.
SplitMasks make_step_imbalance(const SparseGraph& graph, int base_per_class,
                               double ratio, int val_per_class, std::uint64_t seed);

// k train labels per class, val_per_class validation per class, rest test.
SplitMasks make_fewshot(const SparseGraph& graph, int labels_per_class,
                        int val_per_class, std::uint64_t seed);

// Ground-truth class histogram over nodes outside train_idx. Diagnostic only.
std::vector<int> unlabeled_class_distribution(const SparseGraph& graph,
                                              const SplitMasks& masks);

void validate_masks(const SparseGraph& graph, const SplitMasks& masks);

void save_split(const SplitMasks& masks, const std::filesystem::path& path);
SplitMasks load_split(const std::filesystem::path& path);

}  // namespace iceberg
