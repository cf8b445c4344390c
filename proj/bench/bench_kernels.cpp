// Times the OpenMP kernels against their serial references.
#include <omp.h>

#include <cstdio>
#include <functional>

#include "iceberg/graph.hpp"
#include "iceberg/kernels.hpp"
#include "iceberg/propagation.hpp"
#include "iceberg/rng.hpp"

using namespace iceberg;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.next_gaussian();
  return m;
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

void report(const char* name, double flops, double serial_s, double parallel_s) {
  std::printf("%-12s %10.2f ms %10.2f ms %8.2fx %9.2f GFLOP/s\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, flops / parallel_s * 1e-9);
}

}  // namespace

int main() {
  const int n = 512, reps = 5;
  Rng rng(42);
  Matrix a = random_matrix(n, n, rng);
  Matrix b = random_matrix(n, n, rng);
  Matrix out(n, n);
  const double gemm_flops = 2.0 * n * n * n;

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-12s %13s %13s %9s %17s\n", "kernel", "serial", "parallel", "speedup",
              "parallel rate");

  report("gemm", gemm_flops,
         best_of(reps, [&] { kernels::serial::gemm(a, b, out); }),
         best_of(reps, [&] { kernels::gemm(a, b, out); }));
  report("gemm_at_b", gemm_flops,
         best_of(reps, [&] { kernels::serial::gemm_at_b(a, b, out); }),
         best_of(reps, [&] { kernels::gemm_at_b(a, b, out); }));
  report("gemm_a_bt", gemm_flops,
         best_of(reps, [&] { kernels::serial::gemm_a_bt(a, b, out); }),
         best_of(reps, [&] { kernels::gemm_a_bt(a, b, out); }));

  SparseGraph g = generate_sbm(2000, {1000, 1000}, 0.02, 0.005, 64, 1.0, 7);
  NormalizedAdjacency adj = normalize_adjacency(g, true);
  Matrix x = g.features;
  Matrix y(x.rows, x.cols);
  const double spmm_flops = 2.0 * adj.matrix.nnz() * x.cols;
  report("spmm", spmm_flops,
         best_of(reps, [&] { kernels::serial::spmm(adj.matrix, x, y); }),
         best_of(reps, [&] { kernels::spmm(adj.matrix, x, y); }));

  const PropagationConfig prop{0.1, 10};
  const double t0 = omp_get_wtime();
  DiffusedFeatures d = diffuse_graph(g, prop);
  std::printf("\ndiffusion (%d nodes, %d features, %d hops): %.2f ms\n", g.num_nodes,
              x.cols, prop.hops, (omp_get_wtime() - t0) * 1e3);
  return d.matrix.rows == x.rows ? 0 : 1;
}
