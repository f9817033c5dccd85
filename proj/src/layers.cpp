#include "avf/layers.hpp"

#include <cmath>

#include "avf/error.hpp"

namespace avf {

namespace {

Tensor glorot(std::size_t out, std::size_t in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor w({out, in});
  for (double& x : w.data()) x = rng.uniform(-limit, limit);
  return w;
}

void require_dim(Tape& tape, Var x, std::size_t expected, const char* layer) {
  const Tensor& v = tape.value(x);
  if (v.rank() != 1 || v.size() != expected) {
    throw ShapeError(std::string(layer) + ": input " + v.shape_string() + " does not match width " +
                     std::to_string(expected));
  }
}

}  // namespace

DenseParams init_dense(std::size_t in, std::size_t out, Rng& rng) {
  return DenseParams{glorot(out, in, rng), Tensor({out})};
}

LstmParams init_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmParams p;
  for (std::size_t g = 0; g < 4; ++g) {
    p.gates[g].W = glorot(hidden, in, rng);
    p.gates[g].U = glorot(hidden, hidden, rng);
    p.gates[g].b = Tensor({hidden}, g == kForgetGate ? 1.0 : 0.0);
  }
  return p;
}

DenseVars bind(Tape& tape, const DenseParams& p) { return DenseVars{tape.leaf(p.W), tape.leaf(p.b)}; }

LstmVars bind(Tape& tape, const LstmParams& p) {
  LstmVars v;
  for (std::size_t g = 0; g < 4; ++g) {
    v.W[g] = tape.leaf(p.gates[g].W);
    v.U[g] = tape.leaf(p.gates[g].U);
    v.b[g] = tape.leaf(p.gates[g].b);
  }
  return v;
}

Var dense_linear(Tape& tape, Var x, const DenseVars& p) {
  require_dim(tape, x, tape.value(p.W).dim(1), "dense");
  return tape.add(tape.matmul(p.W, x), p.b);
}

Var dense_tanh(Tape& tape, Var x, const DenseVars& p) { return tape.tanh(dense_linear(tape, x, p)); }

Var dropout(Tape& tape, Var x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (mode == Mode::kEval || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor mask = Tensor::zeros_like(tape.value(x));
  for (double& m : mask.data()) m = rng.uniform() < p ? 0.0 : keep_scale;
  return tape.mask_mul(x, std::move(mask));
}

LstmState lstm_zero_state(Tape& tape, std::size_t hidden) {
  return LstmState{tape.leaf(Tensor({hidden})), tape.leaf(Tensor({hidden}))};
}

LstmState lstm_step(Tape& tape, Var x, const LstmState& state, const LstmVars& p) {
  const std::size_t hidden = tape.value(p.U[0]).dim(0);
  require_dim(tape, x, tape.value(p.W[0]).dim(1), "lstm");
  require_dim(tape, state.h, hidden, "lstm state h");
  require_dim(tape, state.c, hidden, "lstm state c");

  auto preact = [&](std::size_t g) {
    return tape.add(tape.add(tape.matmul(p.W[g], x), tape.matmul(p.U[g], state.h)), p.b[g]);
  };
  const Var i = tape.sigmoid(preact(kInputGate));
  const Var f = tape.sigmoid(preact(kForgetGate));
  const Var o = tape.sigmoid(preact(kOutputGate));
  const Var candidate = tape.tanh(preact(kCellGate));
  const Var c = tape.add(tape.mul(f, state.c), tape.mul(i, candidate));
  const Var h = tape.mul(o, tape.tanh(c));
  return LstmState{h, c};
}

std::vector<Var> lstm_sequence(Tape& tape, std::span<const Var> xs, const LstmVars& p) {
  if (xs.empty()) throw DomainError("lstm_sequence: empty input sequence");
  LstmState s = lstm_zero_state(tape, tape.value(p.U[0]).dim(0));
  std::vector<Var> hs;
  hs.reserve(xs.size());
  for (Var x : xs) {
    s = lstm_step(tape, x, s, p);
    hs.push_back(s.h);
  }
  return hs;
}

}  // namespace avf
