#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <omp.h>

#include "iceberg/kernels.hpp"
#include "iceberg/rng.hpp"

using namespace iceberg;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double sparsity = 0.0) {
  Matrix m(rows, cols);
  for (double& v : m.data) {
    v = sparsity > 0.0 && rng.next_bernoulli(sparsity) ? 0.0 : rng.next_gaussian();
  }
  return m;
}

CsrMatrix random_csr(int rows, int cols, double density, Rng& rng) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.push_back(0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (rng.next_bernoulli(density)) {
        m.col_idx.push_back(j);
        m.values.push_back(rng.next_gaussian());
      }
    }
    m.row_ptr.push_back(static_cast<std::int64_t>(m.col_idx.size()));
  }
  return m;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (a.data[i] != b.data[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("gemm matches a straightforward triple loop") {
  Rng rng(11);
  Matrix a = random_matrix(7, 5, rng);
  Matrix b = random_matrix(5, 9, rng);
  Matrix out(7, 9);
  kernels::gemm(a, b, out);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 9; ++j) {
      double want = 0.0;
      for (int k = 0; k < 5; ++k) want += a.at(i, k) * b.at(k, j);
      CHECK(out.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("gemm identity returns the input") {
  Rng rng(12);
  Matrix a = random_matrix(6, 6, rng);
  Matrix eye(6, 6);
  for (int i = 0; i < 6; ++i) eye.at(i, i) = 1.0;
  Matrix out(6, 6);
  kernels::gemm(a, eye, out);
  CHECK(bitwise_equal(out, a));
}

TEST_CASE("gemm_at_b and gemm_a_bt match explicit transposes") {
  Rng rng(13);
  Matrix a = random_matrix(8, 4, rng, 0.3);
  Matrix b = random_matrix(8, 6, rng, 0.3);

  Matrix at(4, 8);
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 4; ++k) at.at(k, i) = a.at(i, k);
  }
  Matrix want(4, 6), got(4, 6);
  kernels::serial::gemm(at, b, want);
  kernels::gemm_at_b(a, b, got);
  for (std::size_t i = 0; i < want.data.size(); ++i) {
    CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
  }

  Matrix c = random_matrix(5, 6, rng);
  Matrix ct(6, 5);
  for (int i = 0; i < 5; ++i) {
    for (int k = 0; k < 6; ++k) ct.at(k, i) = c.at(i, k);
  }
  Matrix want2(8, 5), got2(8, 5);
  kernels::serial::gemm(b, ct, want2);
  kernels::gemm_a_bt(b, c, got2);
  for (std::size_t i = 0; i < want2.data.size(); ++i) {
    CHECK(got2.data[i] == doctest::Approx(want2.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("spmm matches dense multiply") {
  Rng rng(14);
  CsrMatrix a = random_csr(10, 10, 0.3, rng);
  Matrix x = random_matrix(10, 4, rng);
  Matrix got(10, 4);
  kernels::spmm(a, x, got);

  Matrix dense(10, 10);
  for (int i = 0; i < 10; ++i) {
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      dense.at(i, a.col_idx[e]) = a.values[e];
    }
  }
  Matrix want(10, 4);
  kernels::serial::gemm(dense, x, want);
  for (std::size_t i = 0; i < want.data.size(); ++i) {
    CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
  Rng rng(15);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    for (int trial = 0; trial < 5; ++trial) {
      Matrix a = random_matrix(17 + trial, 13, rng, 0.4);
      Matrix b = random_matrix(13, 11, rng, 0.4);
      Matrix sp(17 + trial, 11), pp(17 + trial, 11);
      kernels::serial::gemm(a, b, sp);
      kernels::gemm(a, b, pp);
      CHECK(bitwise_equal(sp, pp));

      Matrix c = random_matrix(17 + trial, 11, rng);
      Matrix sq(13, 11), pq(13, 11);
      kernels::serial::gemm_at_b(a, c, sq);
      kernels::gemm_at_b(a, c, pq);
      if (threads == 1) {
        CHECK(bitwise_equal(sq, pq));
      } else {
        // Thread-count-dependent reduction order: equality only to rounding.
        for (std::size_t i = 0; i < sq.data.size(); ++i) {
          CHECK(pq.data[i] == doctest::Approx(sq.data[i]).epsilon(1e-12));
        }
      }

      Matrix d = random_matrix(9, 13, rng);
      Matrix sr(17 + trial, 9), pr(17 + trial, 9);
      kernels::serial::gemm_a_bt(a, d, sr);
      kernels::gemm_a_bt(a, d, pr);
      CHECK(bitwise_equal(sr, pr));

      CsrMatrix s = random_csr(17 + trial, 17 + trial, 0.2, rng);
      Matrix x = random_matrix(17 + trial, 7, rng);
      Matrix ss(17 + trial, 7), ps(17 + trial, 7);
      kernels::serial::spmm(s, x, ss);
      kernels::spmm(s, x, ps);
      CHECK(bitwise_equal(ss, ps));
    }
  }
  omp_set_num_threads(saved);
}

TEST_CASE("kernels reject shape mismatches") {
  Matrix a(3, 4), b(5, 6), out(3, 6);
  CHECK_THROWS_AS(kernels::gemm(a, b, out), std::invalid_argument);
  CHECK_THROWS_AS(kernels::gemm_at_b(a, b, out), std::invalid_argument);
  CHECK_THROWS_AS(kernels::gemm_a_bt(a, b, out), std::invalid_argument);
  CsrMatrix s;
  s.rows = 3;
  s.cols = 3;
  s.row_ptr = {0, 0, 0, 0};
  Matrix x(4, 2), y(3, 2);
  CHECK_THROWS_AS(kernels::spmm(s, x, y), std::invalid_argument);
}
