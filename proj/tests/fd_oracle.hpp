#pragma once

// Central finite-difference oracle used by the gradient tests.
//
// The oracle functions re-implement the forward math in long double and never
// touch the tape, so they are independent of both the forward kernels and the
// backward pass. Extended precision keeps the difference quotient's roundoff
// (about |f| * 1e-19 / eps) far below the relative tolerances being checked,
// even for gradient entries near 1e-8.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "avf/tensor.hpp"

namespace avf::testing {

using LD = long double;
using Vec = std::vector<LD>;

inline Vec to_ld(const Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// d f / d inputs[k][i] for every k, i by central differences with step eps.
inline std::vector<Tensor> finite_difference(const std::function<LD(const std::vector<Vec>&)>& f,
                                             const std::vector<Tensor>& inputs, LD eps = 1e-5L) {
  std::vector<Vec> x;
  for (const auto& t : inputs) x.push_back(to_ld(t));
  std::vector<Tensor> grads;
  for (std::size_t k = 0; k < x.size(); ++k) {
    Tensor g = Tensor::zeros_like(inputs[k]);
    for (std::size_t i = 0; i < x[k].size(); ++i) {
      const LD orig = x[k][i];
      x[k][i] = orig + eps;
      const LD up = f(x);
      x[k][i] = orig - eps;
      const LD down = f(x);
      x[k][i] = orig;
      g[i] = static_cast<double>((up - down) / (2 * eps));
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

inline double max_relative_error(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) worst = std::max(worst, relative_error(a[k][i], b[k][i]));
  return worst;
}

inline double max_abs_error(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) worst = std::max(worst, std::abs(a[k][i] - b[k][i]));
  return worst;
}

// Long-double reference math.

inline Vec matvec(const Vec& w, std::size_t rows, std::size_t cols, const Vec& x) {
  Vec y(rows, 0.0L);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) y[i] += w[i * cols + j] * x[j];
  return y;
}

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec mul(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return a;
}

inline Vec tanh(Vec a) {
  for (LD& x : a) x = std::tanh(x);
  return a;
}

inline Vec sigmoid(Vec a) {
  for (LD& x : a) x = 1.0L / (1.0L + std::exp(-x));
  return a;
}

inline Vec softmax(const Vec& z) {
  const LD mx = *std::max_element(z.begin(), z.end());
  Vec p(z.size());
  LD total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) total += (p[i] = std::exp(z[i] - mx));
  for (LD& x : p) x /= total;
  return p;
}

inline LD cross_entropy(const Vec& z, std::size_t label) { return -std::log(softmax(z)[label]); }

/// Dense layer y = W x + b with W stored row-major [out x in].
inline Vec affine(const Vec& w, const Vec& b, const Vec& x) {
  return add(matvec(w, b.size(), x.size(), x), b);
}

struct LstmRef {
  // Gate order input, forget, output, candidate; each W [h x in], U [h x h].
  Vec W[4], U[4], b[4];
  std::size_t hidden = 0;

  void step(const Vec& x, Vec& h, Vec& c) const {
    Vec pre[4];
    for (int g = 0; g < 4; ++g) pre[g] = add(add(matvec(W[g], hidden, x.size(), x), matvec(U[g], hidden, hidden, h)), b[g]);
    const Vec i = sigmoid(pre[0]), f = sigmoid(pre[1]), o = sigmoid(pre[2]), cand = tanh(pre[3]);
    c = add(mul(f, c), mul(i, cand));
    h = mul(o, tanh(c));
  }
};

}  // namespace avf::testing
