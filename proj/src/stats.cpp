#include "avf/stats.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "avf/error.hpp"

namespace avf::stats {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // Use the symmetry relation where the fraction converges fastest.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_cdf(double t, int df) {
  if (df < 1) throw DomainError("t_cdf: degrees of freedom must be >= 1, got " + std::to_string(df));
  if (std::isnan(t)) throw DomainError("t_cdf: t is NaN");
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  const double nu = df;
  // P(|T| > |t|) = I_{nu / (nu + t^2)}(nu / 2, 1 / 2)
  const double tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TTestResult paired_t_one_tailed(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw DomainError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw DomainError("paired t-test needs at least two pairs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance level must lie in (0, 1)");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];

  TTestResult r;
  r.df = static_cast<int>(d.size()) - 1;
  const double md = mean(d);
  const double sd = sample_sd(d);
  if (sd == 0.0) {
    if (md > 0.0) {
      r.t = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    } else if (md < 0.0) {
      r.t = -std::numeric_limits<double>::infinity();
      r.p = 1.0;
    } else {
      r.t = 0.0;
      r.p = 0.5;
    }
  } else {
    r.t = md / (sd / std::sqrt(static_cast<double>(d.size())));
    // Upper tail evaluated directly; 1 - cdf would cancel for large t.
    r.p = t_cdf(-r.t, r.df);
  }
  r.significant = r.p < alpha;
  return r;
}

}  // namespace avf::stats
