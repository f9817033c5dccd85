#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "avf/rng.hpp"
#include "avf/tape.hpp"
#include "avf/tensor.hpp"

namespace avf {

enum class Mode { kTrain, kEval };

/// Fully connected layer: W[out x in], b[out].
struct DenseParams {
  Tensor W;
  Tensor b;

  std::size_t in_dim() const { return W.dim(1); }
  std::size_t out_dim() const { return W.dim(0); }

  bool operator==(const DenseParams&) const = default;
};

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };

struct LstmGateParams {
  Tensor W;  // [h x in]
  Tensor U;  // [h x h]
  Tensor b;  // [h]

  bool operator==(const LstmGateParams&) const = default;
};

/// Forget-gate LSTM without peepholes. Gates are stored in the order
/// input, forget, output, candidate.
struct LstmParams {
  std::array<LstmGateParams, 4> gates;

  std::size_t in_dim() const { return gates[0].W.dim(1); }
  std::size_t hidden() const { return gates[0].W.dim(0); }

  bool operator==(const LstmParams&) const = default;
};

/// Uniform Glorot init in +-sqrt(6 / (in + out)), zero bias.
DenseParams init_dense(std::size_t in, std::size_t out, Rng& rng);
/// Glorot init for every W and U; forget-gate bias 1, other biases 0.
LstmParams init_lstm(std::size_t in, std::size_t hidden, Rng& rng);

// Parameters bound onto a tape as leaves.

struct DenseVars {
  Var W;
  Var b;
};

struct LstmVars {
  std::array<Var, 4> W;
  std::array<Var, 4> U;
  std::array<Var, 4> b;
};

struct LstmState {
  Var h;
  Var c;
};

DenseVars bind(Tape& tape, const DenseParams& p);
LstmVars bind(Tape& tape, const LstmParams& p);

/// tanh(W x + b)
Var dense_tanh(Tape& tape, Var x, const DenseVars& p);
/// W x + b
Var dense_linear(Tape& tape, Var x, const DenseVars& p);

/// Inverted dropout. Eval mode and p == 0 return x unchanged; train mode
/// zeroes each entry with probability p and scales survivors by 1/(1-p).
Var dropout(Tape& tape, Var x, double p, Mode mode, Rng& rng);

/// Zero hidden and cell state of width h.
LstmState lstm_zero_state(Tape& tape, std::size_t hidden);

LstmState lstm_step(Tape& tape, Var x, const LstmState& state, const LstmVars& p);

/// Unrolls from the zero state and returns h_1..h_T.
std::vector<Var> lstm_sequence(Tape& tape, std::span<const Var> xs, const LstmVars& p);

}  // namespace avf
