#include "iceberg/kernels.hpp"

#include <algorithm>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace iceberg::kernels {

namespace {

void check_gemm_shapes(const Matrix& a, const Matrix& b, const Matrix& out,
                       int am, int ak, int bk, int bn) {
  if (ak != bk || out.rows != am || out.cols != bn) {
    throw std::invalid_argument("gemm: shape mismatch");
  }
}

}  // namespace

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_shapes(a, b, out, a.rows, a.cols, b.rows, b.cols);
  const int n = a.rows, d = a.cols, h = b.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* c = out.row(i);
    for (int x = 0; x < h; ++x) c[x] = 0.0;
    const double* ar = a.row(i);
    for (int k = 0; k < d; ++k) {
      const double av = ar[k];
      if (av == 0.0) continue;
      const double* br = b.row(k);
      for (int x = 0; x < h; ++x) c[x] += av * br[x];
    }
  }
}

void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols) {
    throw std::invalid_argument("gemm_at_b: shape mismatch");
  }
  const int n = a.rows, m = a.cols, k = b.cols;
  std::fill(out.data.begin(), out.data.end(), 0.0);
#ifdef _OPENMP
  const int nthreads = omp_get_max_threads();
#else
  const int nthreads = 1;
#endif
  if (nthreads <= 1 || n < 2 * nthreads) {
    serial::gemm_at_b(a, b, out);
    return;
  }
#ifdef _OPENMP
  // Static row blocks per thread, partials reduced in thread-id order.
  std::vector<Matrix> partials(nthreads);
#pragma omp parallel num_threads(nthreads)
  {
    const int t = omp_get_thread_num();
    const int chunk = (n + nthreads - 1) / nthreads;
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    Matrix& p = partials[t];
    p = Matrix(m, k, 0.0);
    for (int i = lo; i < hi; ++i) {
      const double* ar = a.row(i);
      const double* br = b.row(i);
      for (int j = 0; j < m; ++j) {
        const double av = ar[j];
        if (av == 0.0) continue;
        double* pr = p.row(j);
        for (int x = 0; x < k; ++x) pr[x] += av * br[x];
      }
    }
  }
  for (int t = 0; t < nthreads; ++t) {
    if (partials[t].size() == 0) continue;
    for (std::size_t idx = 0; idx < out.data.size(); ++idx) {
      out.data[idx] += partials[t].data[idx];
    }
  }
#endif
}

void gemm_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.cols || out.rows != a.rows || out.cols != b.rows) {
    throw std::invalid_argument("gemm_a_bt: shape mismatch");
  }
  const int n = a.rows, m = a.cols, k = b.rows;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    double* c = out.row(i);
    for (int j = 0; j < k; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int x = 0; x < m; ++x) acc += ar[x] * br[x];
      c[j] = acc;
    }
  }
}

void spmm(const CsrMatrix& a, const Matrix& x, Matrix& out) {
  if (a.cols != x.rows || out.rows != a.rows || out.cols != x.cols) {
    throw std::invalid_argument("spmm: shape mismatch");
  }
  const int n = a.rows, d = x.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* o = out.row(i);
    for (int c = 0; c < d; ++c) o[c] = 0.0;
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const double v = a.values[e];
      const double* xr = x.row(a.col_idx[e]);
      for (int c = 0; c < d; ++c) o[c] += v * xr[c];
    }
  }
}

namespace serial {

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_shapes(a, b, out, a.rows, a.cols, b.rows, b.cols);
  const int n = a.rows, d = a.cols, h = b.cols;
  for (int i = 0; i < n; ++i) {
    double* c = out.row(i);
    for (int x = 0; x < h; ++x) c[x] = 0.0;
    const double* ar = a.row(i);
    for (int k = 0; k < d; ++k) {
      const double av = ar[k];
      if (av == 0.0) continue;
      const double* br = b.row(k);
      for (int x = 0; x < h; ++x) c[x] += av * br[x];
    }
  }
}

void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols) {
    throw std::invalid_argument("gemm_at_b: shape mismatch");
  }
  const int n = a.rows, m = a.cols, k = b.cols;
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    const double* br = b.row(i);
    for (int j = 0; j < m; ++j) {
      const double av = ar[j];
      if (av == 0.0) continue;
      double* pr = out.row(j);
      for (int x = 0; x < k; ++x) pr[x] += av * br[x];
    }
  }
}

void gemm_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.cols || out.rows != a.rows || out.cols != b.rows) {
    throw std::invalid_argument("gemm_a_bt: shape mismatch");
  }
  const int n = a.rows, m = a.cols, k = b.rows;
  for (int i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    double* c = out.row(i);
    for (int j = 0; j < k; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int x = 0; x < m; ++x) acc += ar[x] * br[x];
      c[j] = acc;
    }
  }
}

void spmm(const CsrMatrix& a, const Matrix& x, Matrix& out) {
  if (a.cols != x.rows || out.rows != a.rows || out.cols != x.cols) {
    throw std::invalid_argument("spmm: shape mismatch");
  }
  const int n = a.rows, d = x.cols;
  for (int i = 0; i < n; ++i) {
    double* o = out.row(i);
    for (int c = 0; c < d; ++c) o[c] = 0.0;
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const double v = a.values[e];
      const double* xr = x.row(a.col_idx[e]);
      for (int c = 0; c < d; ++c) o[c] += v * xr[c];
    }
  }
}

}  // namespace serial

}  // namespace iceberg::kernels
