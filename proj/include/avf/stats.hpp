#pragma once

#include <cstddef>
#include <span>

namespace avf::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Student-t cumulative distribution with df degrees of freedom.
double t_cdf(double t, int df);

struct TTestResult {
  double t = 0.0;  // +infinity when every difference is equal and positive
  int df = 0;
  double p = 0.5;
  bool significant = false;
};

/// One-tailed paired t-test of H1: mean(a - b) > 0.
TTestResult paired_t_one_tailed(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

double mean(std::span<const double> x);
/// Sample standard deviation (divisor n - 1); 0 for n < 2.
double sample_sd(std::span<const double> x);

}  // namespace avf::stats
