#include "iceberg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "iceberg/hash.hpp"
#include "iceberg/rng.hpp"

namespace iceberg {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::ifstream open_or_fail(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) fail("missing file: " + p.string());
  return f;
}

// Builds sorted deduplicated symmetric CSR from an undirected edge list.
CsrMatrix build_symmetric_csr(int n, std::vector<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;  // input self edges dropped
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  CsrMatrix csr;
  csr.rows = n;
  csr.cols = n;
  csr.row_ptr.assign(n + 1, 0);
  for (const auto& [u, v] : directed) csr.row_ptr[u + 1]++;
  for (int i = 0; i < n; ++i) csr.row_ptr[i + 1] += csr.row_ptr[i];
  csr.col_idx.reserve(directed.size());
  csr.values.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    (void)u;
    csr.col_idx.push_back(v);
    csr.values.push_back(1.0);
  }
  return csr;
}

}  // namespace

void validate_graph(const SparseGraph& graph) {
  if (graph.num_nodes <= 0) fail("graph: N must be > 0");
  if (graph.feature_dim() <= 0) fail("graph: D must be > 0");
  if (graph.num_classes < 2) fail("graph: C must be >= 2");
  if (graph.features.rows != graph.num_nodes) fail("graph: feature row count != N");
  if (static_cast<int>(graph.labels.size()) != graph.num_nodes) {
    fail("graph: label count != N");
  }
  std::vector<char> class_seen(graph.num_classes, 0);
  for (int i = 0; i < graph.num_nodes; ++i) {
    const int y = graph.labels[i];
    if (y < 0 || y >= graph.num_classes) fail("graph: label out of range");
    class_seen[y] = 1;
  }
  for (int c = 0; c < graph.num_classes; ++c) {
    if (!class_seen[c]) {
      fail("graph: class " + std::to_string(c) + " has no nodes");
    }
  }

  const CsrMatrix& a = graph.adjacency;
  if (a.rows != graph.num_nodes || a.cols != graph.num_nodes) {
    fail("graph: adjacency shape != N x N");
  }
  if (static_cast<int>(a.row_ptr.size()) != a.rows + 1) fail("graph: bad row_ptr");
  for (int i = 0; i < a.rows; ++i) {
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const int j = a.col_idx[e];
      if (j < 0 || j >= a.cols) fail("graph: column index out of range");
      if (j == i) fail("graph: self edge stored");
      if (e > a.row_ptr[i] && a.col_idx[e - 1] >= j) {
        fail("graph: columns not sorted/duplicated in row " + std::to_string(i));
      }
      // symmetric partner lookup
      const auto lo = a.col_idx.begin() + a.row_ptr[j];
      const auto hi = a.col_idx.begin() + a.row_ptr[j + 1];
      const auto it = std::lower_bound(lo, hi, i);
      if (it == hi || *it != i) fail("graph: adjacency not symmetric");
      const double v_ij = a.values[e];
      const double v_ji = a.values[a.row_ptr[j] + (it - lo)];
      if (v_ij != v_ji) fail("graph: asymmetric edge value");
    }
  }
}

SparseGraph load_graph(const std::filesystem::path& dataset_dir) {
  SparseGraph g;

  // meta.json
  {
    std::ifstream f = open_or_fail(dataset_dir / "meta.json");
    json meta;
    try {
      f >> meta;
    } catch (const json::exception& e) {
      fail("malformed meta.json: " + std::string(e.what()));
    }
    if (!meta.contains("num_nodes") || !meta.contains("num_features") ||
        !meta.contains("num_classes")) {
      fail("meta.json: missing num_nodes/num_features/num_classes");
    }
    g.num_nodes = meta["num_nodes"].get<int>();
    g.num_classes = meta["num_classes"].get<int>();
    g.name = meta.value("name", std::string{});
    const int d = meta["num_features"].get<int>();
    if (g.num_nodes <= 0 || d <= 0) fail("meta.json: non-positive dimensions");
    g.features = Matrix(g.num_nodes, d);
  }

  // edges.txt
  std::vector<std::pair<int, int>> edges;
  {
    std::ifstream f = open_or_fail(dataset_dir / "edges.txt");
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ss(line);
      long long u, v;
      if (!(ss >> u >> v)) {
        fail("edges.txt line " + std::to_string(lineno) + ": malformed line");
      }
      if (u < 0 || u >= g.num_nodes || v < 0 || v >= g.num_nodes) {
        fail("edges.txt line " + std::to_string(lineno) + ": node id out of range");
      }
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  }
  g.adjacency = build_symmetric_csr(g.num_nodes, std::move(edges));

  // features.txt
  {
    std::ifstream f = open_or_fail(dataset_dir / "features.txt");
    std::string line;
    const int d = g.feature_dim();
    for (int i = 0; i < g.num_nodes; ++i) {
      if (!std::getline(f, line)) {
        fail("features.txt line " + std::to_string(i + 1) +
             ": dimension mismatch (expected " + std::to_string(g.num_nodes) + " rows)");
      }
      std::istringstream ss(line);
      double* row = g.features.row(i);
      for (int j = 0; j < d; ++j) {
        if (!(ss >> row[j])) {
          fail("features.txt line " + std::to_string(i + 1) +
               ": malformed line (expected " + std::to_string(d) + " values)");
        }
      }
      double extra;
      if (ss >> extra) {
        fail("features.txt line " + std::to_string(i + 1) +
             ": dimension mismatch (more than " + std::to_string(d) + " values)");
      }
    }
  }

  // labels.txt
  {
    std::ifstream f = open_or_fail(dataset_dir / "labels.txt");
    std::string line;
    g.labels.resize(g.num_nodes);
    for (int i = 0; i < g.num_nodes; ++i) {
      if (!std::getline(f, line)) {
        fail("labels.txt line " + std::to_string(i + 1) + ": dimension mismatch");
      }
      std::istringstream ss(line);
      long long y;
      if (!(ss >> y)) {
        fail("labels.txt line " + std::to_string(i + 1) + ": malformed line");
      }
      if (y < 0 || y >= g.num_classes) {
        fail("labels.txt line " + std::to_string(i + 1) + ": label out of range");
      }
      g.labels[i] = static_cast<int>(y);
    }
  }

  validate_graph(g);
  return g;
}

void save_graph(const SparseGraph& graph, const std::filesystem::path& dataset_dir) {
  std::filesystem::create_directories(dataset_dir);
  {
    json meta;
    meta["num_nodes"] = graph.num_nodes;
    meta["num_features"] = graph.feature_dim();
    meta["num_classes"] = graph.num_classes;
    meta["name"] = graph.name;
    std::ofstream f(dataset_dir / "meta.json");
    f << meta.dump(2) << "\n";
  }
  {
    std::ofstream f(dataset_dir / "edges.txt");
    for (int i = 0; i < graph.num_nodes; ++i) {
      for (std::int64_t e = graph.adjacency.row_ptr[i]; e < graph.adjacency.row_ptr[i + 1]; ++e) {
        const int j = graph.adjacency.col_idx[e];
        if (i < j) f << i << " " << j << "\n";
      }
    }
  }
  {
    std::ofstream f(dataset_dir / "features.txt");
    f.precision(17);
    for (int i = 0; i < graph.num_nodes; ++i) {
      const double* row = graph.features.row(i);
      for (int j = 0; j < graph.feature_dim(); ++j) {
        if (j) f << " ";
        f << row[j];
      }
      f << "\n";
    }
  }
  {
    std::ofstream f(dataset_dir / "labels.txt");
    for (int y : graph.labels) f << y << "\n";
  }
}

NormalizedAdjacency normalize_adjacency(const SparseGraph& graph, bool add_self_loops) {
  const int n = graph.num_nodes;
  const CsrMatrix& a = graph.adjacency;

  // Degrees of A + sI.
  std::vector<double> degree(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      degree[i] += a.values[e];
    }
    if (add_self_loops) degree[i] += 1.0;
  }
  std::vector<double> inv_sqrt(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (degree[i] > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
  }

  NormalizedAdjacency out;
  out.self_loops_added = add_self_loops;
  CsrMatrix& m = out.matrix;
  m.rows = n;
  m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    std::int64_t row_nnz = a.row_ptr[i + 1] - a.row_ptr[i];
    if (add_self_loops) ++row_nnz;
    m.row_ptr[i + 1] = m.row_ptr[i] + row_nnz;
  }
  m.col_idx.resize(m.row_ptr[n]);
  m.values.resize(m.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    std::int64_t w = m.row_ptr[i];
    bool diag_written = false;
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const int j = a.col_idx[e];
      if (add_self_loops && !diag_written && j > i) {
        m.col_idx[w] = i;
        m.values[w] = inv_sqrt[i] * inv_sqrt[i];
        ++w;
        diag_written = true;
      }
      m.col_idx[w] = j;
      // Grouping keeps (i,j) and (j,i) bitwise equal: the inner product is
      // symmetric in i,j and the outer multiply sees identical operands.
      m.values[w] = a.values[e] * (inv_sqrt[i] * inv_sqrt[j]);
      ++w;
    }
    if (add_self_loops && !diag_written) {
      m.col_idx[w] = i;
      m.values[w] = inv_sqrt[i] * inv_sqrt[i];
      ++w;
    }
  }
  return out;
}

SparseGraph generate_sbm(int num_nodes, const std::vector<int>& class_sizes,
                         double p_in, double p_out, int feature_dim,
                         double feature_shift, std::uint64_t seed) {
  if (class_sizes.size() < 2) fail("sbm: need at least 2 classes");
  int total = 0;
  for (int s : class_sizes) {
    if (s <= 0) fail("sbm: class sizes must be > 0");
    total += s;
  }
  if (total != num_nodes) fail("sbm: class sizes must sum to num_nodes");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) fail("sbm: probabilities in [0,1]");
  const int c = static_cast<int>(class_sizes.size());
  if (feature_shift != 0.0 && c > feature_dim) {
    fail("sbm: class count exceeds feature_dim, no distinct mean axes");
  }

  SparseGraph g;
  g.num_nodes = num_nodes;
  g.num_classes = c;
  g.name = "sbm";
  g.labels.resize(num_nodes);
  {
    int node = 0;
    for (int cls = 0; cls < c; ++cls) {
      for (int k = 0; k < class_sizes[cls]; ++k) g.labels[node++] = cls;
    }
  }

  Rng edge_rng(mix_seed(seed, 0));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < num_nodes; ++i) {
    for (int j = i + 1; j < num_nodes; ++j) {
      const double p = (g.labels[i] == g.labels[j]) ? p_in : p_out;
      if (edge_rng.next_bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  g.adjacency = build_symmetric_csr(num_nodes, std::move(edges));

  Rng feat_rng(mix_seed(seed, 1));
  g.features = Matrix(num_nodes, feature_dim);
  for (int i = 0; i < num_nodes; ++i) {
    double* row = g.features.row(i);
    for (int j = 0; j < feature_dim; ++j) row[j] = feat_rng.next_gaussian();
    row[g.labels[i] % feature_dim] += feature_shift;
  }

  validate_graph(g);
  return g;
}

std::uint64_t graph_digest(const SparseGraph& graph) {
  Fnv1a h;
  h.update_int(graph.num_nodes);
  h.update_int(graph.num_classes);
  h.update_vec(graph.adjacency.row_ptr);
  h.update_vec(graph.adjacency.col_idx);
  h.update_vec(graph.adjacency.values);
  h.update_int(graph.features.rows);
  h.update_int(graph.features.cols);
  h.update_vec(graph.features.data);
  h.update_vec(graph.labels);
  return h.digest();
}

}  // namespace iceberg
