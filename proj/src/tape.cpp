#include "avf/tape.hpp"

#include <algorithm>
#include <cmath>

#include "avf/error.hpp"
#include "avf/kernels.hpp"

namespace avf {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

void require_vector(const Tensor& a, const char* what) {
  if (a.rank() != 1) throw ShapeError(std::string(what) + ": expected a vector, got " + a.shape_string());
}

double sigmoid_of(double x) {
  // Branch keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor softmax_of(const Tensor& logits) {
  Tensor p = Tensor::zeros_like(logits);
  if (logits.size() == 0) return p;
  const auto in = logits.data();
  const double mx = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    p[i] = std::exp(in[i] - mx);
    z += p[i];
  }
  for (std::size_t i = 0; i < in.size(); ++i) p[i] /= z;
  return p;
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (v.owner_ != this || v.index_ >= nodes_.size()) throw DomainError("variable is not recorded on this tape");
  return nodes_[v.index_];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  const bool vec = B.rank() == 1;
  if (A.rank() != 2 || (B.rank() != 2 && !vec) || A.dim(1) != B.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + A.shape_string() + " and " + B.shape_string());
  }
  const std::size_t m = A.dim(0), k = A.dim(1), n = vec ? 1 : B.dim(1);
  Node out;
  out.op = Op::kMatmul;
  out.lhs = a.index_;
  out.rhs = b.index_;
  out.value = vec ? Tensor({m}) : Tensor({m, n});
  kernels::gemm_nn(m, k, n, A.data().data(), B.data().data(), out.value.data().data(), false);
  return push(std::move(out));
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  require_same_shape(A, B, "add");
  Node out;
  out.op = Op::kAdd;
  out.lhs = a.index_;
  out.rhs = b.index_;
  out.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) out.value[i] += B[i];
  return push(std::move(out));
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  require_same_shape(A, B, "mul");
  Node out;
  out.op = Op::kMul;
  out.lhs = a.index_;
  out.rhs = b.index_;
  out.value = A;
  for (std::size_t i = 0; i < B.size(); ++i) out.value[i] *= B[i];
  return push(std::move(out));
}

Var Tape::tanh(Var a) {
  const Tensor& A = node(a).value;
  Node out;
  out.op = Op::kTanh;
  out.lhs = a.index_;
  out.value = Tensor::zeros_like(A);
  out.aux = Tensor::zeros_like(A);
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double t = std::tanh(A[i]);
    out.value[i] = t;
    out.aux[i] = 1.0 - t * t;
  }
  return push(std::move(out));
}

Var Tape::sigmoid(Var a) {
  const Tensor& A = node(a).value;
  Node out;
  out.op = Op::kSigmoid;
  out.lhs = a.index_;
  out.value = Tensor::zeros_like(A);
  out.aux = Tensor::zeros_like(A);
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double s = sigmoid_of(A[i]);
    out.value[i] = s;
    out.aux[i] = s * (1.0 - s);
  }
  return push(std::move(out));
}

Var Tape::concat(Var a, Var b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  require_vector(A, "concat");
  require_vector(B, "concat");
  std::vector<double> joined;
  joined.reserve(A.size() + B.size());
  joined.insert(joined.end(), A.data().begin(), A.data().end());
  joined.insert(joined.end(), B.data().begin(), B.data().end());
  Node out;
  out.op = Op::kConcat;
  out.lhs = a.index_;
  out.rhs = b.index_;
  out.index = A.size();
  out.value = Tensor::vector(std::move(joined));
  return push(std::move(out));
}

Var Tape::mask_mul(Var a, Tensor mask) {
  const Tensor& A = node(a).value;
  require_same_shape(A, mask, "mask_mul");
  Node out;
  out.op = Op::kMaskMul;
  out.lhs = a.index_;
  out.value = A;
  for (std::size_t i = 0; i < A.size(); ++i) out.value[i] *= mask[i];
  out.aux = std::move(mask);
  return push(std::move(out));
}

Var Tape::scale(Var a, double alpha) {
  const Tensor& A = node(a).value;
  Node out;
  out.op = Op::kScale;
  out.lhs = a.index_;
  out.scalar = alpha;
  out.value = A;
  for (double& x : out.value.data()) x *= alpha;
  return push(std::move(out));
}

Var Tape::sum(Var a) {
  const Tensor& A = node(a).value;
  double s = 0.0;
  for (double x : A.data()) s += x;
  Node out;
  out.op = Op::kSum;
  out.lhs = a.index_;
  out.value = Tensor::scalar(s);
  return push(std::move(out));
}

Var Tape::pick(Var a, std::size_t index) {
  const Tensor& A = node(a).value;
  require_vector(A, "pick");
  if (index >= A.size()) {
    throw DomainError("pick: index " + std::to_string(index) + " out of range for " + A.shape_string());
  }
  Node out;
  out.op = Op::kPick;
  out.lhs = a.index_;
  out.index = index;
  out.value = Tensor::scalar(A[index]);
  return push(std::move(out));
}

Var Tape::softmax(Var logits) {
  const Tensor& L = node(logits).value;
  require_vector(L, "softmax");
  Node out;
  out.op = Op::kSoftmax;
  out.lhs = logits.index_;
  out.value = softmax_of(L);
  return push(std::move(out));
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t label) {
  const Tensor& L = node(logits).value;
  require_vector(L, "softmax_cross_entropy");
  if (label >= L.size()) {
    throw DomainError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                      std::to_string(L.size()) + " classes");
  }
  const auto in = L.data();
  const double mx = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (double x : in) z += std::exp(x - mx);
  Node out;
  out.op = Op::kSoftmaxCrossEntropy;
  out.lhs = logits.index_;
  out.index = label;
  out.value = Tensor::scalar(std::log(z) + mx - in[label]);
  out.aux = softmax_of(L);
  return push(std::move(out));
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
  node(v);
  ensure_grads();
  return grads_[v.index_];
}

const Tensor& Tape::local_derivative(Var v) const {
  const Node& n = node(v);
  if (n.op != Op::kTanh && n.op != Op::kSigmoid) throw DomainError("node has no recorded local derivative");
  return n.aux;
}

Tape::Op Tape::op(Var v) const { return node(v).op; }

void Tape::ensure_grads() const {
  for (std::size_t i = grads_.size(); i < nodes_.size(); ++i) grads_.push_back(Tensor::zeros_like(nodes_[i].value));
}

void Tape::backward(Var seed) {
  const Node& s = node(seed);
  if (s.value.size() != 1) throw ShapeError("backward: seed must be scalar, got " + s.value.shape_string());
  ensure_grads();
  for (auto& g : grads_) std::fill(g.data().begin(), g.data().end(), 0.0);
  grads_[seed.index_][0] = 1.0;

  for (std::size_t idx = seed.index_ + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    const Tensor& g = grads_[idx];
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        const Tensor& A = nodes_[n.lhs].value;
        const Tensor& B = nodes_[n.rhs].value;
        const std::size_t m = A.dim(0), k = A.dim(1), cols = B.rank() == 1 ? 1 : B.dim(1);
        // dA += dC * B^T ; dB += A^T * dC
        kernels::gemm_nt_acc(m, cols, k, g.data().data(), B.data().data(), grads_[n.lhs].data().data());
        kernels::gemm_tn_acc(m, k, cols, A.data().data(), g.data().data(), grads_[n.rhs].data().data());
        break;
      }
      case Op::kAdd: {
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        auto gb = grads_[n.rhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        break;
      }
      case Op::kMul: {
        const Tensor& A = nodes_[n.lhs].value;
        const Tensor& B = nodes_[n.rhs].value;
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
        auto gb = grads_[n.rhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
        break;
      }
      case Op::kTanh:
      case Op::kSigmoid:
      case Op::kMaskMul: {
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.aux[i];
        break;
      }
      case Op::kConcat: {
        auto ga = grads_[n.lhs].data();
        auto gb = grads_[n.rhs].data();
        for (std::size_t i = 0; i < n.index; ++i) ga[i] += g[i];
        for (std::size_t i = n.index; i < g.size(); ++i) gb[i - n.index] += g[i];
        break;
      }
      case Op::kScale: {
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
        break;
      }
      case Op::kSum: {
        auto ga = grads_[n.lhs].data();
        for (double& x : ga) x += g[0];
        break;
      }
      case Op::kPick:
        grads_[n.lhs][n.index] += g[0];
        break;
      case Op::kSoftmax: {
        // dL/dz_j = p_j * (g_j - sum_i g_i p_i)
        const Tensor& p = n.value;
        double dot = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) dot += g[i] * p[i];
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < p.size(); ++i) ga[i] += p[i] * (g[i] - dot);
        break;
      }
      case Op::kSoftmaxCrossEntropy: {
        auto ga = grads_[n.lhs].data();
        for (std::size_t i = 0; i < ga.size(); ++i) {
          ga[i] += g[0] * (n.aux[i] - (i == n.index ? 1.0 : 0.0));
        }
        break;
      }
    }
  }
}

}  // namespace avf
