#include <cmath>
#include <vector>

#include "avf/error.hpp"
#include "avf/layers.hpp"
#include "doctest.h"
#include "fd_oracle.hpp"

using namespace avf;
namespace ref = avf::testing;
using ref::LD;
using ref::Vec;

namespace {

Tensor random_tensor(Tensor::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

LstmParams random_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmParams p;
  for (auto& g : p.gates) {
    g.W = random_tensor({hidden, in}, rng);
    g.U = random_tensor({hidden, hidden}, rng);
    g.b = random_tensor({hidden}, rng);
  }
  return p;
}

// r . y, a scalar that weights every output entry differently.
Var project(Tape& tape, Var y, const Tensor& r) { return tape.sum(tape.mul(tape.leaf(r), y)); }

LD dot(const Vec& a, const Vec& b) {
  LD s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("dense layer examples") {
  Tape tape;
  SUBCASE("zero parameters give zeros") {
    const DenseVars p = bind(tape, DenseParams{Tensor({3, 2}), Tensor({3})});
    const Var y = dense_tanh(tape, tape.leaf(Tensor::vector({0.7, -4.0})), p);
    CHECK(tape.value(y) == Tensor({3}));
  }
  SUBCASE("identity weight") {
    const DenseVars p = bind(tape, DenseParams{Tensor::matrix({{1}}), Tensor({1})});
    const Var y = dense_tanh(tape, tape.leaf(Tensor::vector({0.1})), p);
    CHECK(tape.value(y)[0] == std::tanh(0.1));
  }
  SUBCASE("linear variant skips the squashing") {
    const DenseVars p = bind(tape, DenseParams{Tensor::matrix({{2, 0}, {0, 3}}), Tensor::vector({1, -1})});
    const Var y = dense_linear(tape, tape.leaf(Tensor::vector({1, 1})), p);
    CHECK(tape.value(y) == Tensor::vector({3, 2}));
  }
  SUBCASE("dimension mismatch") {
    const DenseVars p = bind(tape, DenseParams{Tensor({3, 2}), Tensor({3})});
    CHECK_THROWS_AS(dense_tanh(tape, tape.leaf(Tensor({3})), p), ShapeError);
  }
}

TEST_CASE("dense gradient matches finite differences") {
  Rng rng(21);
  const Tensor W = random_tensor({3, 4}, rng), b = random_tensor({3}, rng), x = random_tensor({4}, rng),
               r = random_tensor({3}, rng);
  Tape tape;
  const DenseVars p = bind(tape, DenseParams{W, b});
  const Var xv = tape.leaf(x);
  tape.backward(project(tape, dense_tanh(tape, xv, p), r));
  const std::vector<Tensor> analytic{tape.grad(p.W), tape.grad(p.b), tape.grad(xv)};
  const Vec rr = ref::to_ld(r);
  const auto numeric = ref::finite_difference(
      [&](const std::vector<Vec>& v) { return dot(rr, ref::tanh(ref::affine(v[0], v[1], v[2]))); }, {W, b, x});
  CHECK(ref::max_relative_error(analytic, numeric) < 1e-6);
}

TEST_CASE("glorot init bounds and forget bias") {
  Rng rng(22);
  const DenseParams d = init_dense(30, 10, rng);
  const double limit = std::sqrt(6.0 / 40.0);
  for (double w : d.W.data()) CHECK(std::abs(w) <= limit);
  for (double v : d.b.data()) CHECK(v == 0.0);
  const LstmParams l = init_lstm(5, 7, rng);
  for (std::size_t g = 0; g < 4; ++g) {
    for (double w : l.gates[g].W.data()) CHECK(std::abs(w) <= std::sqrt(6.0 / 12.0));
    for (double u : l.gates[g].U.data()) CHECK(std::abs(u) <= std::sqrt(6.0 / 14.0));
    for (double v : l.gates[g].b.data()) CHECK(v == (g == kForgetGate ? 1.0 : 0.0));
  }
}

TEST_CASE("dropout examples") {
  Rng rng(23);
  Tape tape;
  const Tensor x = random_tensor({50}, rng);
  const Var xv = tape.leaf(x);
  CHECK(tape.value(dropout(tape, xv, 0.5, Mode::kEval, rng)) == x);
  CHECK(tape.value(dropout(tape, xv, 0.0, Mode::kTrain, rng)) == x);
  CHECK_THROWS_AS(dropout(tape, xv, 1.0, Mode::kTrain, rng), DomainError);
  CHECK_THROWS_AS(dropout(tape, xv, -0.1, Mode::kTrain, rng), DomainError);

  const Var ones = tape.leaf(Tensor({10000}, 1.0));
  const Tensor& y = tape.value(dropout(tape, ones, 0.5, Mode::kTrain, rng));
  double total = 0.0;
  for (double v : y.data()) {
    CHECK((v == 0.0 || v == 2.0));
    total += v;
  }
  CHECK(std::abs(total / 10000.0 - 1.0) <= 0.05);
}

TEST_CASE("dropout backward reuses the forward mask") {
  Rng rng(24);
  Tape tape;
  const Var x = tape.leaf(random_tensor({200}, rng));
  const Var y = dropout(tape, x, 0.3, Mode::kTrain, rng);
  tape.backward(tape.sum(y));
  const Tensor& g = tape.grad(x);
  for (std::size_t i = 0; i < 200; ++i) {
    const double factor = tape.value(y)[i] / tape.value(x)[i];
    CHECK(g[i] == doctest::Approx(factor).epsilon(1e-15));
    CHECK((g[i] == 0.0 || g[i] == doctest::Approx(1.0 / 0.7)));
  }
}

TEST_CASE("dropout train expectation equals eval output") {
  Rng rng(25);
  const Tensor x = random_tensor({4}, rng);
  const std::size_t draws = 20000;
  const double p = 0.5;
  std::vector<double> mean(4, 0.0);
  for (std::size_t n = 0; n < draws; ++n) {
    Tape tape;
    const Tensor& y = tape.value(dropout(tape, tape.leaf(x), p, Mode::kTrain, rng));
    for (std::size_t i = 0; i < 4; ++i) mean[i] += y[i] / draws;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    // Each draw has variance x^2 p/(1-p).
    const double se = std::abs(x[i]) * std::sqrt(p / (1 - p) / draws);
    CHECK(std::abs(mean[i] - x[i]) <= 3 * se);
  }
}

TEST_CASE("lstm step examples") {
  Tape tape;
  const LstmVars p = bind(tape, LstmParams{{LstmGateParams{Tensor({2, 3}), Tensor({2, 2}), Tensor({2})},
                                             LstmGateParams{Tensor({2, 3}), Tensor({2, 2}), Tensor({2})},
                                             LstmGateParams{Tensor({2, 3}), Tensor({2, 2}), Tensor({2})},
                                             LstmGateParams{Tensor({2, 3}), Tensor({2, 2}), Tensor({2})}}});
  const Var x = tape.leaf(Tensor::vector({0.3, -2.0, 5.0}));
  SUBCASE("zero parameters halve the cell") {
    const Tensor c0 = Tensor::vector({1.5, -0.8});
    const LstmState s = lstm_step(tape, x, LstmState{tape.leaf(Tensor({2})), tape.leaf(c0)}, p);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(tape.value(s.c)[i] == 0.5 * c0[i]);
      CHECK(tape.value(s.h)[i] == doctest::Approx(0.5 * std::tanh(0.5 * c0[i])).epsilon(1e-15));
    }
  }
  SUBCASE("zero parameters and zero state stay at zero") {
    const LstmState s = lstm_step(tape, x, lstm_zero_state(tape, 2), p);
    CHECK(tape.value(s.c) == Tensor({2}));
    CHECK(tape.value(s.h) == Tensor({2}));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(lstm_step(tape, tape.leaf(Tensor({2})), lstm_zero_state(tape, 2), p), ShapeError);
  }
}

TEST_CASE("lstm sequence against a manual unroll") {
  Rng rng(26);
  const LstmParams params = random_lstm(3, 4, rng);
  ref::LstmRef lr;
  lr.hidden = 4;
  for (int g = 0; g < 4; ++g) {
    lr.W[g] = ref::to_ld(params.gates[g].W);
    lr.U[g] = ref::to_ld(params.gates[g].U);
    lr.b[g] = ref::to_ld(params.gates[g].b);
  }
  Tape tape;
  const LstmVars p = bind(tape, params);
  std::vector<Var> xs;
  std::vector<Tensor> xt;
  for (int t = 0; t < 3; ++t) {
    xt.push_back(random_tensor({3}, rng, -2, 2));
    xs.push_back(tape.leaf(xt.back()));
  }
  const std::vector<Var> hs = lstm_sequence(tape, xs, p);
  REQUIRE(hs.size() == 3);
  Vec h(4, 0.0L), c(4, 0.0L);
  for (int t = 0; t < 3; ++t) {
    lr.step(ref::to_ld(xt[t]), h, c);
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.value(hs[t])[i] == doctest::Approx(static_cast<double>(h[i])).epsilon(1e-13));
  }

  // Length one is a single step from the zero state.
  const std::vector<Var> one = lstm_sequence(tape, std::span<const Var>(xs.data(), 1), p);
  REQUIRE(one.size() == 1);
  CHECK(tape.value(one[0]) == tape.value(lstm_step(tape, xs[0], lstm_zero_state(tape, 4), p).h));
  CHECK_THROWS_AS(lstm_sequence(tape, std::span<const Var>(), p), DomainError);
}

TEST_CASE("lstm BPTT gradient over 5 steps matches finite differences") {
  Rng rng(27);
  const std::size_t in = 3, hidden = 4, steps = 5;
  const LstmParams params = random_lstm(in, hidden, rng);
  std::vector<Tensor> xt, rt;
  for (std::size_t t = 0; t < steps; ++t) {
    xt.push_back(random_tensor({in}, rng, -2, 2));
    rt.push_back(random_tensor({hidden}, rng));
  }

  Tape tape;
  const LstmVars p = bind(tape, params);
  std::vector<Var> xs;
  for (const auto& x : xt) xs.push_back(tape.leaf(x));
  const std::vector<Var> hs = lstm_sequence(tape, xs, p);
  Var loss = project(tape, hs[0], rt[0]);
  for (std::size_t t = 1; t < steps; ++t) loss = tape.add(loss, project(tape, hs[t], rt[t]));
  tape.backward(loss);

  std::vector<Tensor> inputs, analytic;
  for (int g = 0; g < 4; ++g) {
    inputs.insert(inputs.end(), {params.gates[g].W, params.gates[g].U, params.gates[g].b});
    analytic.insert(analytic.end(), {tape.grad(p.W[g]), tape.grad(p.U[g]), tape.grad(p.b[g])});
  }
  for (std::size_t t = 0; t < steps; ++t) {
    inputs.push_back(xt[t]);
    analytic.push_back(tape.grad(xs[t]));
  }

  const auto numeric = ref::finite_difference(
      [&](const std::vector<Vec>& v) {
        ref::LstmRef lr;
        lr.hidden = hidden;
        for (int g = 0; g < 4; ++g) {
          lr.W[g] = v[3 * g];
          lr.U[g] = v[3 * g + 1];
          lr.b[g] = v[3 * g + 2];
        }
        Vec h(hidden, 0.0L), c(hidden, 0.0L);
        LD total = 0;
        for (std::size_t t = 0; t < steps; ++t) {
          lr.step(v[12 + t], h, c);
          total += dot(ref::to_ld(rt[t]), h);
        }
        return total;
      },
      inputs);
  CHECK(ref::max_relative_error(analytic, numeric) < 1e-6);
}

TEST_CASE("lstm activations stay in range for large inputs") {
  Rng rng(28);
  const LstmParams params = random_lstm(6, 5, rng);
  Tape tape;
  const LstmVars p = bind(tape, params);
  LstmState s = lstm_zero_state(tape, 5);
  for (int t = 0; t < 40; ++t) {
    s = lstm_step(tape, tape.leaf(random_tensor({6}, rng, -15, 15)), s, p);
    for (double h : tape.value(s.h).data()) {
      CHECK(h > -1.0);
      CHECK(h < 1.0);
    }
    // Gates in [0, 1] bound the cell growth to one unit per step.
    for (double c : tape.value(s.c).data()) CHECK(std::abs(c) <= t + 1.0);
  }
}
