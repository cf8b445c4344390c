#include "iceberg/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "iceberg/hash.hpp"
#include "iceberg/kernels.hpp"

namespace iceberg {

namespace {

constexpr char kMagic[8] = {'I', 'C', 'E', 'D', 'I', 'F', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void check_config(const PropagationConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("propagation: alpha must be in (0, 1]");
  }
  if (config.hops < 0) throw std::invalid_argument("propagation: hops must be >= 0");
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::uint64_t diffusion_hash(const SparseGraph& graph, const PropagationConfig& config) {
  Fnv1a h;
  h.update_int(graph.num_nodes);
  h.update_vec(graph.adjacency.row_ptr);
  h.update_vec(graph.adjacency.col_idx);
  h.update_vec(graph.adjacency.values);
  h.update_int(graph.features.rows);
  h.update_int(graph.features.cols);
  h.update_vec(graph.features.data);
  h.update_double(config.alpha);
  h.update_int(config.hops);
  return h.digest();
}

DiffusedFeatures diffuse(const Matrix& features, const NormalizedAdjacency& adj,
                         const PropagationConfig& config, std::uint64_t source_hash) {
  check_config(config);
  if (adj.matrix.rows != features.rows || adj.matrix.cols != features.rows) {
    throw std::invalid_argument("propagation: adjacency/features dimension mismatch");
  }
  for (double v : features.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("propagation: non-finite input features");
  }

  DiffusedFeatures out;
  out.config = config;
  out.source_hash = source_hash;
  out.matrix = features;
  if (config.alpha == 1.0 || config.hops == 0) return out;

  Matrix next(features.rows, features.cols);
  const double keep = 1.0 - config.alpha;
  for (int t = 0; t < config.hops; ++t) {
    kernels::spmm(adj.matrix, out.matrix, next);
    const std::size_t n = next.data.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      next.data[i] = keep * next.data[i] + config.alpha * features.data[i];
    }
    std::swap(out.matrix, next);
  }
  return out;
}

DiffusedFeatures diffuse_graph(const SparseGraph& graph, const PropagationConfig& config) {
  NormalizedAdjacency adj = normalize_adjacency(graph, true);
  return diffuse(graph.features, adj, config, diffusion_hash(graph, config));
}

void cache_diffusion(const DiffusedFeatures& diffused, const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write " + path.string());
  auto put = [&](const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f.get()) != n) {
      throw std::runtime_error("short write to " + path.string());
    }
  };
  put(kMagic, sizeof(kMagic));
  put(&kVersion, sizeof(kVersion));
  std::int32_t n = diffused.matrix.rows, d = diffused.matrix.cols;
  std::int32_t hops = diffused.config.hops;
  put(&n, sizeof(n));
  put(&d, sizeof(d));
  put(&diffused.config.alpha, sizeof(double));
  put(&hops, sizeof(hops));
  put(&diffused.source_hash, sizeof(std::uint64_t));
  put(diffused.matrix.data.data(), diffused.matrix.data.size() * sizeof(double));
}

DiffusedFeatures load_diffusion(const std::filesystem::path& path,
                                std::uint64_t expected_hash) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot read " + path.string());
  auto get = [&](void* p, std::size_t n) {
    if (std::fread(p, 1, n, f.get()) != n) {
      throw std::runtime_error("truncated diffusion cache " + path.string());
    }
  };
  char magic[8];
  get(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path.string() + ": not a diffusion cache");
  }
  std::uint32_t version = 0;
  get(&version, sizeof(version));
  if (version != kVersion) {
    throw std::runtime_error(path.string() + ": unsupported cache version");
  }
  std::int32_t n = 0, d = 0, hops = 0;
  DiffusedFeatures out;
  get(&n, sizeof(n));
  get(&d, sizeof(d));
  get(&out.config.alpha, sizeof(double));
  get(&hops, sizeof(hops));
  get(&out.source_hash, sizeof(std::uint64_t));
  if (n < 0 || d < 0) throw std::runtime_error(path.string() + ": corrupt header");
  out.config.hops = hops;
  if (out.source_hash != expected_hash) {
    throw std::runtime_error("stale cache: " + path.string() +
                             " was built from different inputs");
  }
  out.matrix = Matrix(n, d);
  get(out.matrix.data.data(), out.matrix.data.size() * sizeof(double));
  return out;
}

}  // namespace iceberg
