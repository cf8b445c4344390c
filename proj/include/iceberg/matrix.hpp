#pragma once

#include <cstdint>
#include <vector>

namespace iceberg {

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::size_t size() const { return data.size(); }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// Sparse CSR matrix. Column indices are sorted within each row.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> row_ptr;  // size rows + 1
  std::vector<int> col_idx;
  std::vector<double> values;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }
};

}  // namespace iceberg
