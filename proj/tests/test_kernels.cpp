#include <cstring>
#include <vector>

#include "avf/kernels.hpp"
#include "avf/rng.hpp"
#include "doctest.h"

using namespace avf;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Shapes include the matrix-vector case (n == 1) that has its own fast path.
const std::size_t kShapes[][3] = {{1, 1, 1}, {7, 5, 1}, {64, 37, 1}, {3, 4, 5}, {33, 17, 9}, {128, 96, 40}};

}  // namespace

TEST_CASE("gemm_nn matches a naive loop and is bit-identical across variants") {
  Rng rng(11);
  for (const auto& s : kShapes) {
    const std::size_t m = s[0], k = s[1], n = s[2];
    const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
    std::vector<double> naive(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < k; ++l) naive[i * n + j] += a[i * k + l] * b[l * n + j];
    for (bool acc : {false, true}) {
      const auto init = random_vec(m * n, rng);
      auto cs = init, cp = init;
      kernels::serial::gemm_nn(m, k, n, a.data(), b.data(), cs.data(), acc);
      kernels::parallel::gemm_nn(m, k, n, a.data(), b.data(), cp.data(), acc);
      CHECK(bit_equal(cs, cp));
      for (std::size_t i = 0; i < m * n; ++i) CHECK(cs[i] == doctest::Approx(naive[i] + (acc ? init[i] : 0.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("transposed products match naive loops and are bit-identical across variants") {
  Rng rng(12);
  for (const auto& s : kShapes) {
    const std::size_t m = s[0], k = s[1], n = s[2];
    {
      // C[m x k] += A[m x n] B[k x n]^T
      const auto a = random_vec(m * n, rng), b = random_vec(k * n, rng), init = random_vec(m * k, rng);
      auto cs = init, cp = init, naive = init;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l)
          for (std::size_t j = 0; j < n; ++j) naive[i * k + l] += a[i * n + j] * b[l * n + j];
      kernels::serial::gemm_nt_acc(m, n, k, a.data(), b.data(), cs.data());
      kernels::parallel::gemm_nt_acc(m, n, k, a.data(), b.data(), cp.data());
      CHECK(bit_equal(cs, cp));
      for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs[i] == doctest::Approx(naive[i]).epsilon(1e-12));
    }
    {
      // C[k x n] += A[m x k]^T B[m x n]
      auto a = random_vec(m * k, rng);
      a[0] = 0.0;  // exact zeros must not change the result
      const auto b = random_vec(m * n, rng), init = random_vec(k * n, rng);
      auto cs = init, cp = init, naive = init;
      for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < m; ++i) naive[l * n + j] += a[i * k + l] * b[i * n + j];
      kernels::serial::gemm_tn_acc(m, k, n, a.data(), b.data(), cs.data());
      kernels::parallel::gemm_tn_acc(m, k, n, a.data(), b.data(), cp.data());
      CHECK(bit_equal(cs, cp));
      for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs[i] == doctest::Approx(naive[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("covariance of a known sample") {
  // Rows (0,0), (2,2), (1,0), (1,2): mean (1,1), cov [[2/3, 2/3], [2/3, 4/3]].
  const std::vector<double> x{0, 0, 2, 2, 1, 0, 1, 2};
  const std::vector<double> mean{1, 1};
  std::vector<double> cs(4), cp(4);
  kernels::serial::covariance(4, 2, x.data(), mean.data(), cs.data());
  kernels::parallel::covariance(4, 2, x.data(), mean.data(), cp.data());
  CHECK(bit_equal(cs, cp));
  CHECK(cs[0] == doctest::Approx(2.0 / 3.0));
  CHECK(cs[1] == doctest::Approx(2.0 / 3.0));
  CHECK(cs[2] == doctest::Approx(2.0 / 3.0));
  CHECK(cs[3] == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("covariance is symmetric and bit-identical across variants") {
  Rng rng(13);
  const std::size_t rows = 200, cols = 45;
  const auto x = random_vec(rows * cols, rng);
  std::vector<double> mean(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) mean[c] += x[r * cols + c] / rows;
  std::vector<double> cs(cols * cols), cp(cols * cols), cd(cols * cols);
  kernels::serial::covariance(rows, cols, x.data(), mean.data(), cs.data());
  kernels::parallel::covariance(rows, cols, x.data(), mean.data(), cp.data());
  kernels::covariance(rows, cols, x.data(), mean.data(), cd.data());
  CHECK(bit_equal(cs, cp));
  CHECK(bit_equal(cs, cd));
  for (std::size_t p = 0; p < cols; ++p)
    for (std::size_t q = 0; q < cols; ++q) CHECK(cs[p * cols + q] == cs[q * cols + p]);
}

TEST_CASE("max_threads is positive") { CHECK(kernels::max_threads() >= 1); }
