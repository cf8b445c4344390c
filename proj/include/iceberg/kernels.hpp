#pragma once

#include "iceberg/matrix.hpp"

namespace iceberg::kernels {

// OpenMP kernels. gemm / gemm_a_bt / spmm parallelize over output rows with a
// fixed per-row accumulation order, so their results are bitwise independent
// of the thread count. gemm_at_b reduces per-thread partials in thread-id
// order: deterministic for a fixed thread count, bitwise equal to the serial
// path at one thread.

// out = a * b
void gemm(const Matrix& a, const Matrix& b, Matrix& out);

// out = a^T * b  (a: n x m, b: n x k, out: m x k)
void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& out);

// out = a * b^T  (a: n x m, b: k x m, out: n x k)
void gemm_a_bt(const Matrix& a, const Matrix& b, Matrix& out);

// out = csr * x
void spmm(const CsrMatrix& a, const Matrix& x, Matrix& out);

namespace serial {

// Reference implementations: plain loops, no threading. Kept for tests and
// the kernel benchmark.

void gemm(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void spmm(const CsrMatrix& a, const Matrix& x, Matrix& out);

}  // namespace serial

}  // namespace iceberg::kernels
