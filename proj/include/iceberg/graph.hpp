#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iceberg/matrix.hpp"

namespace iceberg {

// Undirected graph with dense node features and integer labels.
// Adjacency is symmetric CSR: (i,j) stored iff (j,i) stored, no duplicates,
// no self edges, column indices sorted per row.
struct SparseGraph {
  int num_nodes = 0;
  int num_classes = 0;
  std::string name;
  CsrMatrix adjacency;
  Matrix features;           // num_nodes x D
  std::vector<int> labels;   // length num_nodes, values in [0, num_classes)

  int feature_dim() const { return features.cols; }
};

// D^{-1/2} (A + sI) D^{-1/2}; zero-degree rows stay zero.
struct NormalizedAdjacency {
  CsrMatrix matrix;
  bool self_loops_added = false;
};

// Throws std::runtime_error with a description when any SparseGraph
// invariant fails.
void validate_graph(const SparseGraph& graph);

// Reads meta.json, edges.txt, features.txt, labels.txt from dataset_dir.
// The edge list is symmetrized and deduplicated; input self edges dropped.
SparseGraph load_graph(const std::filesystem::path& dataset_dir);

// Writes a graph back out in the same directory layout.
void save_graph(const SparseGraph& graph, const std::filesystem::path& dataset_dir);

NormalizedAdjacency normalize_adjacency(const SparseGraph& graph, bool add_self_loops);

// Stochastic block model fixture with class-conditional Gaussian features
// (mean feature_shift along a distinct axis per class). Deterministic given
// seed. Nodes are laid out class-contiguously.
SparseGraph generate_sbm(int num_nodes, const std::vector<int>& class_sizes,
                         double p_in, double p_out, int feature_dim,
                         double feature_shift, std::uint64_t seed);

// Content digest over structure, features and labels.
std::uint64_t graph_digest(const SparseGraph& graph);

}  // namespace iceberg
