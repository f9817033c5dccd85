#include "avf/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace avf::kernels {

namespace {

// Row kernels shared by both variants so the per-element summation order
// cannot drift between them.

inline void nn_row(std::size_t i, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
                   bool accumulate) {
  double* crow = c + i * n;
  if (n == 1) {
    // Matrix-vector: a plain dot product, same l-ascending order.
    const double* arow = a + i * k;
    double s = accumulate ? crow[0] : 0.0;
    for (std::size_t l = 0; l < k; ++l) s += arow[l] * b[l];
    crow[0] = s;
    return;
  }
  if (!accumulate) {
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
  }
  const double* arow = a + i * k;
  for (std::size_t l = 0; l < k; ++l) {
    const double av = arow[l];
    const double* brow = b + l * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void nt_row(std::size_t i, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  const double* arow = a + i * n;
  double* crow = c + i * k;
  if (n == 1) {
    // Outer-product row.
    const double av = arow[0];
    for (std::size_t l = 0; l < k; ++l) crow[l] += av * b[l];
    return;
  }
  for (std::size_t l = 0; l < k; ++l) {
    const double* brow = b + l * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
    crow[l] += s;
  }
}

inline void tn_row(std::size_t l, std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                   double* c) {
  double* crow = c + l * n;
  for (std::size_t i = 0; i < m; ++i) {
    const double av = a[i * k + l];
    const double* brow = b + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void cov_row(std::size_t p, std::size_t rows, std::size_t cols, const double* x, const double* mean,
                    double* cov) {
  const double denom = rows > 1 ? static_cast<double>(rows - 1) : 1.0;
  for (std::size_t q = p; q < cols; ++q) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += (x[r * cols + p] - mean[p]) * (x[r * cols + q] - mean[q]);
    cov[p * cols + q] = s / denom;
  }
}

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
  return work >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
  (void)work;
  return false;
#endif
}

void mirror_upper(std::size_t cols, double* cov) {
  for (std::size_t p = 0; p < cols; ++p)
    for (std::size_t q = 0; q < p; ++q) cov[p * cols + q] = cov[q * cols + p];
}

}  // namespace

namespace serial {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) nn_row(i, k, n, a, b, c, accumulate);
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) nt_row(i, n, k, a, b, c);
}

void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
  if (n == 1) {
    // Row-major sweep of A; each c[l] still accumulates over i ascending,
    // exactly as tn_row does.
    for (std::size_t i = 0; i < m; ++i) {
      const double bv = b[i];
      const double* arow = a + i * k;
      for (std::size_t l = 0; l < k; ++l) c[l] += arow[l] * bv;
    }
    return;
  }
  for (std::size_t l = 0; l < k; ++l) tn_row(l, m, k, n, a, b, c);
}

void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov) {
  for (std::size_t p = 0; p < cols; ++p) cov_row(p, rows, cols, x, mean, cov);
  mirror_upper(cols, cov);
}

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) nn_row(static_cast<std::size_t>(i), k, n, a, b, c, accumulate);
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) nt_row(static_cast<std::size_t>(i), n, k, a, b, c);
}

void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
  const auto rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t l = 0; l < rows; ++l) tn_row(static_cast<std::size_t>(l), m, k, n, a, b, c);
}

void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov) {
  const auto n = static_cast<std::ptrdiff_t>(cols);
  // Row p costs (cols - p) dot products; dynamic scheduling evens that out.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t p = 0; p < n; ++p) cov_row(static_cast<std::size_t>(p), rows, cols, x, mean, cov);
  mirror_upper(cols, cov);
}

}  // namespace parallel

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate) {
  if (use_parallel(m * k * n)) {
    parallel::gemm_nn(m, k, n, a, b, c, accumulate);
  } else {
    serial::gemm_nn(m, k, n, a, b, c, accumulate);
  }
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
  if (use_parallel(m * k * n)) {
    parallel::gemm_nt_acc(m, n, k, a, b, c);
  } else {
    serial::gemm_nt_acc(m, n, k, a, b, c);
  }
}

void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
  if (use_parallel(m * k * n)) {
    parallel::gemm_tn_acc(m, k, n, a, b, c);
  } else {
    serial::gemm_tn_acc(m, k, n, a, b, c);
  }
}

void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov) {
  if (use_parallel(rows * cols * cols / 2)) {
    parallel::covariance(rows, cols, x, mean, cov);
  } else {
    serial::covariance(rows, cols, x, mean, cov);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace avf::kernels
