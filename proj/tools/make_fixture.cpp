// Writes a synthetic SBM dataset directory for tests and demos.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "iceberg/graph.hpp"

int main(int argc, char** argv) {
  if (argc != 9) {
    std::fprintf(stderr,
                 "usage: %s <out_dir> <num_classes> <nodes_per_class> <p_in> <p_out> "
                 "<feature_dim> <shift> <seed>\n",
                 argv[0]);
    return 2;
  }
  const std::string out_dir = argv[1];
  const int num_classes = std::atoi(argv[2]);
  const int per_class = std::atoi(argv[3]);
  const double p_in = std::atof(argv[4]);
  const double p_out = std::atof(argv[5]);
  const int feature_dim = std::atoi(argv[6]);
  const double shift = std::atof(argv[7]);
  const std::uint64_t seed = std::strtoull(argv[8], nullptr, 10);

  try {
    std::vector<int> sizes(num_classes, per_class);
    iceberg::SparseGraph g = iceberg::generate_sbm(
        num_classes * per_class, sizes, p_in, p_out, feature_dim, shift, seed);
    iceberg::save_graph(g, out_dir);
    std::printf("wrote %s: %d nodes, %d classes, %d features\n", out_dir.c_str(),
                g.num_nodes, g.num_classes, feature_dim);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
