#pragma once

#include <cstdint>
#include <filesystem>

#include "iceberg/graph.hpp"
#include "iceberg/matrix.hpp"

namespace iceberg {

struct PropagationConfig {
  double alpha = 0.1;  // restart probability in (0, 1]
  int hops = 10;       // T >= 0
};

struct DiffusedFeatures {
  Matrix matrix;  // N x D, X^(T)
  PropagationConfig config;
  std::uint64_t source_hash = 0;  // digest of (graph-as-diffused, config)
};

// Digest over everything diffusion depends on: adjacency structure, raw
// features, and the config. Deliberately excludes labels and class count so
// label-edited copies of a graph can share one cache.
std::uint64_t diffusion_hash(const SparseGraph& graph, const PropagationConfig& config);

// X^(t+1) = (1 - alpha) * adj * X^(t) + alpha * X, run for config.hops steps
// from X^(0) = X. Exact sparse-times-dense iteration. The caller supplies the
// source hash recorded in the result (see diffusion_hash).
DiffusedFeatures diffuse(const Matrix& features, const NormalizedAdjacency& adj,
                         const PropagationConfig& config, std::uint64_t source_hash);

// Convenience: normalize (with self-loops), diffuse, stamp diffusion_hash.
DiffusedFeatures diffuse_graph(const SparseGraph& graph, const PropagationConfig& config);

void cache_diffusion(const DiffusedFeatures& diffused, const std::filesystem::path& path);

// Throws "stale cache" when the stored hash differs from expected_hash.
DiffusedFeatures load_diffusion(const std::filesystem::path& path,
                                std::uint64_t expected_hash);

}  // namespace iceberg
