#pragma once

#include <cstddef>
#include <span>

// Dense linear-algebra kernels behind the tape and PCA.
//
// Each kernel has a serial reference in `serial::` and an OpenMP version in
// `parallel::`. Both compute every output element with the same summation
// order, so results are bit-identical; the parallel versions split work over
// output rows only. The unqualified entry points pick one by problem size.

namespace avf::kernels {

/// Problems with fewer multiply-adds than this run serially.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

namespace serial {

/// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate);
/// C[m x k] += A[m x n] * B[k x n]^T
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
/// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
/// Sample covariance (divisor rows-1) of a rows x cols matrix about `mean`.
void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov);

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate);
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov);

}  // namespace parallel

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c,
             bool accumulate);
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void covariance(std::size_t rows, std::size_t cols, const double* x, const double* mean, double* cov);

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

}  // namespace avf::kernels
