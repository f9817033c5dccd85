#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "avf/error.hpp"
#include "avf/rng.hpp"
#include "avf/stats.hpp"
#include "doctest.h"

using namespace avf;
using LD = long double;

namespace {

// Upper tail P(T > t) by composite Simpson on theta = atan(x), which maps
// the infinite range onto a finite one with a smooth integrand.
double upper_tail_quadrature(double t, int df) {
  const LD nu = df;
  const LD log_c = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5L * std::log(nu * std::numbers::pi_v<LD>);
  auto g = [&](LD theta) {
    const LD x = std::tan(theta), sec2 = 1 + x * x;
    return std::exp(log_c - (nu + 1) / 2 * std::log1p(x * x / nu)) * sec2;
  };
  const LD lo = std::atan(static_cast<LD>(t));
  const LD hi = std::numbers::pi_v<LD> / 2 - 1e-12L;
  const int n = 200000;
  const LD h = (hi - lo) / n;
  LD s = g(lo) + g(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * g(lo + i * h);
  return static_cast<double>(s * h / 3);
}

}  // namespace

TEST_CASE("t_cdf examples") {
  for (int df : {1, 2, 5, 30, 200}) CHECK(stats::t_cdf(0.0, df) == 0.5);
  CHECK(std::abs(stats::t_cdf(12.706, 1) - 0.975) < 1e-4);
  CHECK(std::abs((1.0 - stats::t_cdf(1.7291, 19)) - 0.05) < 5e-4);
  CHECK(std::abs((1.0 - stats::t_cdf(1.0, 10)) - 0.1704) < 1e-3);
  CHECK(stats::t_cdf(std::numeric_limits<double>::infinity(), 3) == 1.0);
  CHECK(stats::t_cdf(-std::numeric_limits<double>::infinity(), 3) == 0.0);
  CHECK_THROWS_AS(stats::t_cdf(1.0, 0), DomainError);
}

TEST_CASE("t_cdf agrees with quadrature of the density") {
  for (int df : {1, 2, 3, 7, 10, 19, 50, 200})
    for (double t : {0.1, 0.5, 1.0, 1.7291, 2.5, 4.0, 9.0}) {
      INFO("df=" << df << " t=" << t);
      CHECK(std::abs((1.0 - stats::t_cdf(t, df)) - upper_tail_quadrature(t, df)) < 1e-8);
    }
}

TEST_CASE("t_cdf symmetry and monotonicity") {
  Rng rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    const int df = 1 + static_cast<int>(rng.below(200));
    const double x = rng.uniform(-20.0, 20.0);
    CHECK(std::abs(stats::t_cdf(-x, df) - (1.0 - stats::t_cdf(x, df))) < 1e-12);
  }
  for (int df : {1, 4, 25, 150}) {
    double prev = stats::t_cdf(-8.0, df);
    for (double t = -7.9; t <= 8.0; t += 0.1) {
      const double c = stats::t_cdf(t, df);
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("incomplete beta closed forms") {
  // I_x(1, 1) = x ; I_x(a, 1) = x^a ; I_x(1, b) = 1 - (1-x)^b
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    CHECK(stats::incomplete_beta(1, 1, x) == doctest::Approx(x).epsilon(1e-12));
    CHECK(stats::incomplete_beta(3.5, 1, x) == doctest::Approx(std::pow(x, 3.5)).epsilon(1e-12));
    CHECK(stats::incomplete_beta(1, 2.5, x) == doctest::Approx(1 - std::pow(1 - x, 2.5)).epsilon(1e-12));
  }
}

TEST_CASE("paired t-test") {
  const std::vector<double> a{0.8, 0.7, 0.9, 0.75, 0.85};
  SUBCASE("identical samples") {
    const auto r = stats::paired_t_one_tailed(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 0.5);
    CHECK(r.df == 4);
    CHECK_FALSE(r.significant);
  }
  SUBCASE("hand-computed statistic") {
    const std::vector<double> b{0.7, 0.7, 0.7, 0.7, 0.7};
    // d = 0.1 0 0.2 0.05 0.15: mean 0.1, sd sqrt(0.025 / 4)
    const auto r = stats::paired_t_one_tailed(a, b);
    const double t = 0.1 / (std::sqrt(0.025 / 4.0) / std::sqrt(5.0));
    CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(1.0 - stats::t_cdf(t, 4)).epsilon(1e-12));
    CHECK(r.significant == (r.p < 0.05));
    CHECK(r.significant);
    // The opposite direction is not significant.
    CHECK_FALSE(stats::paired_t_one_tailed(b, a).significant);
  }
  SUBCASE("constant differences") {
    std::vector<double> up = a, down = a;
    for (double& x : up) x += 0.1;
    for (double& x : down) x -= 0.1;
    const auto r = stats::paired_t_one_tailed(up, a);
    CHECK(r.t == std::numeric_limits<double>::infinity());
    CHECK(r.p == 0.0);
    CHECK(r.significant);
    const auto s = stats::paired_t_one_tailed(down, a);
    CHECK(s.p == 1.0);
    CHECK_FALSE(s.significant);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(stats::paired_t_one_tailed(std::vector<double>{1.0}, std::vector<double>{0.0}), DomainError);
    CHECK_THROWS_AS(stats::paired_t_one_tailed(a, std::vector<double>{1, 2}), DomainError);
  }
}

TEST_CASE("paired t-test shift and scale invariance") {
  Rng rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(20);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = a[i] + rng.normal() * 0.5 - 0.2;
    }
    const auto base = stats::paired_t_one_tailed(a, b);
    const double shift = rng.uniform(-10, 10), scale = rng.uniform(0.1, 10);
    std::vector<double> as = a, bs = b, ac = a, bc = b;
    for (std::size_t i = 0; i < n; ++i) {
      as[i] += shift;
      bs[i] += shift;
      ac[i] *= scale;
      bc[i] *= scale;
    }
    CHECK(stats::paired_t_one_tailed(as, bs).t == doctest::Approx(base.t).epsilon(1e-9));
    CHECK(stats::paired_t_one_tailed(ac, bc).t == doctest::Approx(base.t).epsilon(1e-9));
    CHECK(base.p >= 0.0);
    CHECK(base.p <= 1.0);
  }
}

TEST_CASE("mean and sample sd") {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(stats::mean(x) == 5.0);
  CHECK(stats::sample_sd(x) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(stats::sample_sd(std::vector<double>{3.0}) == 0.0);
}
