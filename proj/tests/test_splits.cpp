#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "iceberg/rng.hpp"
#include "iceberg/splits.hpp"

using namespace iceberg;
namespace fs = std::filesystem;

namespace {

// Path graph with class-contiguous labels; cheap fixture when only the label
// layout matters.
SparseGraph chain_graph(const std::vector<int>& class_sizes) {
  SparseGraph g;
  for (int s : class_sizes) g.num_nodes += s;
  g.num_classes = static_cast<int>(class_sizes.size());
  g.name = "chain";
  g.features = Matrix(g.num_nodes, 1, 0.0);
  g.labels.reserve(g.num_nodes);
  for (int c = 0; c < g.num_classes; ++c) {
    for (int k = 0; k < class_sizes[c]; ++k) g.labels.push_back(c);
  }
  CsrMatrix& a = g.adjacency;
  a.rows = g.num_nodes;
  a.cols = g.num_nodes;
  a.row_ptr.push_back(0);
  for (int i = 0; i < g.num_nodes; ++i) {
    if (i > 0) {
      a.col_idx.push_back(i - 1);
      a.values.push_back(1.0);
    }
    if (i + 1 < g.num_nodes) {
      a.col_idx.push_back(i + 1);
      a.values.push_back(1.0);
    }
    a.row_ptr.push_back(static_cast<std::int64_t>(a.col_idx.size()));
  }
  return g;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("step imbalance reproduces the 7-class gamma=10 layout") {
  SparseGraph g = chain_graph({26, 26, 26, 26, 26, 26, 26});
  SplitMasks m = make_step_imbalance(g, 20, 10.0, 5, 3);
  CHECK(m.labeled_counts == std::vector<int>{20, 20, 20, 20, 2, 2, 2});
  CHECK(m.imbalance_ratio == doctest::Approx(10.0));
  CHECK(m.train_idx.size() == 86);
  CHECK(m.val_idx.size() == 35);
  validate_masks(g, m);
}

TEST_CASE("gamma=1 keeps the balanced base") {
  SparseGraph g = chain_graph({30, 30, 30, 30});
  SplitMasks m = make_step_imbalance(g, 20, 1.0, 5, 0);
  CHECK(m.labeled_counts == std::vector<int>(4, 20));
  CHECK(m.imbalance_ratio == doctest::Approx(1.0));
}

TEST_CASE("6-class gamma=20 floors minority classes to one label") {
  SparseGraph g = chain_graph({30, 30, 30, 30, 30, 30});
  SplitMasks m = make_step_imbalance(g, 20, 20.0, 5, 1);
  CHECK(m.labeled_counts == std::vector<int>{20, 20, 20, 1, 1, 1});
  CHECK(m.imbalance_ratio == doctest::Approx(20.0));
}

TEST_CASE("excessive imbalance ratio is rejected") {
  SparseGraph g = chain_graph({30, 30});
  CHECK_THROWS_WITH_AS(make_step_imbalance(g, 20, 30.0, 5, 0),
                       doctest::Contains("imbalance ratio too large"),
                       std::invalid_argument);
}

TEST_CASE("insufficient class population is rejected") {
  SparseGraph g = chain_graph({30, 10});
  CHECK_THROWS_WITH_AS(make_step_imbalance(g, 20, 2.0, 5, 0),
                       doctest::Contains("class 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(make_fewshot(g, 8, 5, 0), doctest::Contains("class 1"),
                       std::invalid_argument);
}

TEST_CASE("removed minority labels join the test pool") {
  SparseGraph g = chain_graph({26, 26, 26, 26});
  SplitMasks m = make_step_imbalance(g, 20, 10.0, 5, 11);
  CHECK(m.train_idx.size() + m.val_idx.size() + m.test_idx.size() ==
        static_cast<std::size_t>(g.num_nodes));
  std::set<int> all;
  for (int i : m.train_idx) all.insert(i);
  for (int i : m.val_idx) all.insert(i);
  for (int i : m.test_idx) all.insert(i);
  CHECK(all.size() == static_cast<std::size_t>(g.num_nodes));
}

TEST_CASE("fewshot 1-shot on 7 classes") {
  SparseGraph g = chain_graph({26, 26, 26, 26, 26, 26, 26});
  SplitMasks m = make_fewshot(g, 1, 5, 0);
  CHECK(m.train_idx.size() == 7);
  CHECK(m.labeled_counts == std::vector<int>(7, 1));
  CHECK(m.imbalance_ratio == doctest::Approx(1.0));
}

TEST_CASE("fewshot set arithmetic at PubMed scale") {
  SparseGraph g = chain_graph({6572, 6572, 6573});
  SplitMasks m = make_fewshot(g, 5, 30, 1);
  CHECK(m.train_idx.size() == 15);
  CHECK(m.val_idx.size() == 90);
  CHECK(m.test_idx.size() == 19612);
  validate_masks(g, m);
}

TEST_CASE("different seeds move nodes but keep the count contract") {
  SparseGraph g = chain_graph({40, 40, 40});
  SplitMasks a = make_fewshot(g, 5, 10, 1);
  SplitMasks b = make_fewshot(g, 5, 10, 2);
  CHECK(a.train_idx != b.train_idx);
  CHECK(a.labeled_counts == b.labeled_counts);
}

TEST_CASE("splits are deterministic in all parameters") {
  SparseGraph g = chain_graph({40, 40, 40, 40});
  for (std::uint64_t seed : {0ULL, 5ULL, 123456789ULL}) {
    SplitMasks a = make_step_imbalance(g, 10, 5.0, 7, seed);
    SplitMasks b = make_step_imbalance(g, 10, 5.0, 7, seed);
    CHECK(a.train_idx == b.train_idx);
    CHECK(a.val_idx == b.val_idx);
    CHECK(a.test_idx == b.test_idx);
  }
}

TEST_CASE("disjointness holds over random parameter draws") {
  SparseGraph g = chain_graph({35, 35, 35, 35, 35});
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int base = 2 + static_cast<int>(rng.next_below(10));
    const double ratio = 1.0 + static_cast<double>(rng.next_below(static_cast<std::uint64_t>(base)));
    const int val = static_cast<int>(rng.next_below(8));
    SplitMasks m = make_step_imbalance(g, base, ratio, val, rng.next_u64());
    validate_masks(g, m);  // throws on overlap or count drift
    const int floor_count = static_cast<int>(base / ratio);
    CHECK(*std::min_element(m.labeled_counts.begin(), m.labeled_counts.end()) == floor_count);
  }
}

TEST_CASE("post-removal ratio is exact when divisible") {
  SparseGraph g = chain_graph({30, 30, 30, 30});
  SplitMasks m = make_step_imbalance(g, 20, 4.0, 0, 9);
  CHECK(m.labeled_counts == std::vector<int>{20, 20, 5, 5});
  CHECK(m.imbalance_ratio == doctest::Approx(4.0));
}

TEST_CASE("unlabeled class distribution diagnostics") {
  SparseGraph g = chain_graph({26, 26, 26, 26});

  SUBCASE("all nodes labeled leaves an empty complement") {
    SplitMasks m;
    for (int i = 0; i < g.num_nodes; ++i) m.train_idx.push_back(i);
    m.labeled_counts = {26, 26, 26, 26};
    CHECK(unlabeled_class_distribution(g, m) == std::vector<int>(4, 0));
  }

  SUBCASE("balanced split on equal classes is exactly uniform") {
    SplitMasks m = make_step_imbalance(g, 10, 1.0, 5, 2);
    CHECK(unlabeled_class_distribution(g, m) == std::vector<int>(4, 16));
  }

  SUBCASE("imbalanced split leaves minority classes mostly unlabeled") {
    SplitMasks m = make_step_imbalance(g, 20, 10.0, 2, 2);
    std::vector<int> u = unlabeled_class_distribution(g, m);
    // Minority classes keep 2 labels and 24 unlabeled nodes: a 12x excess.
    CHECK(u[2] == 24);
    CHECK(u[3] == 24);
    CHECK(u[2] >= 10 * m.labeled_counts[2]);
  }
}

TEST_CASE("split.json round trip is byte identical") {
  SparseGraph g = chain_graph({26, 26, 26});
  SplitMasks m = make_step_imbalance(g, 12, 3.0, 4, 17);
  const fs::path dir = fs::temp_directory_path() / "iceberg_split_test";
  fs::create_directories(dir);
  const fs::path first = dir / "a.json", second = dir / "b.json";
  save_split(m, first);
  SplitMasks back = load_split(first);
  CHECK(back.train_idx == m.train_idx);
  CHECK(back.val_idx == m.val_idx);
  CHECK(back.test_idx == m.test_idx);
  CHECK(back.labeled_counts == m.labeled_counts);
  CHECK(back.kind == m.kind);
  CHECK(back.seed == m.seed);
  save_split(back, second);
  CHECK(slurp(first) == slurp(second));
  fs::remove_all(dir);
}
