#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "avf/tensor.hpp"

namespace avf {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  std::size_t index() const { return index_; }
  bool valid() const { return owner_ != nullptr; }

 private:
  friend class Tape;
  Var(const Tape* owner, std::size_t index) : owner_(owner), index_(index) {}
  const Tape* owner_ = nullptr;
  std::size_t index_ = 0;
};

/// Define-by-run reverse-mode differentiation tape.
///
/// Every operation appends one node holding its forward value, so nodes are
/// always in topological order. A tape must stay on one thread for its
/// forward and backward lifetime.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatmul,
    kAdd,
    kMul,
    kTanh,
    kSigmoid,
    kConcat,
    kMaskMul,
    kScale,
    kSum,
    kPick,
    kSoftmax,
    kSoftmaxCrossEntropy,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var leaf(Tensor value);

  /// A[m x k] * B[k x n], or A[m x k] * b[k] giving a vector.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var tanh(Var a);
  Var sigmoid(Var a);
  /// Rank-1 concatenation; backward splits the gradient at dim(a).
  Var concat(Var a, Var b);
  /// Elementwise product with a constant mask (dropout).
  Var mask_mul(Var a, Tensor mask);
  Var scale(Var a, double alpha);
  Var sum(Var a);
  /// Scalar a[index] of a rank-1 value.
  Var pick(Var a, std::size_t index);
  /// Max-subtracted softmax of a rank-1 value.
  Var softmax(Var logits);
  /// -log softmax(logits)[label], with log-sum-exp stabilization.
  Var softmax_cross_entropy(Var logits, std::size_t label);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward seed with respect to v. Zero before any
  /// backward pass and for values the seed does not depend on.
  const Tensor& grad(Var v) const;
  /// Local elementwise derivative recorded by tanh and sigmoid nodes.
  const Tensor& local_derivative(Var v) const;
  Op op(Var v) const;

  /// Reverse accumulation from a scalar seed.
  void backward(Var seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    std::size_t index = 0;
    double scalar = 0.0;
    Tensor value;
    Tensor aux;
  };

  const Node& node(Var v) const;
  Var push(Node node);
  void ensure_grads() const;

  std::vector<Node> nodes_;
  mutable std::vector<Tensor> grads_;
};

}  // namespace avf
