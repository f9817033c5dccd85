#include "avf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "avf/kernels.hpp"
#include "avf/rng.hpp"

namespace avf {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348'5546;  // "SHUF"
constexpr std::uint64_t kSplitStream = 0x5350'4c54;    // "SPLT"

/// Last-frame cross-entropy of one item; writes parameter gradients.
double item_gradient(const Model& model, const Item& item, const TrainConfig& cfg, std::uint64_t epoch,
                     std::size_t item_index, std::vector<Tensor>& grads) {
  Rng rng = Rng::keyed({cfg.seed, epoch, item_index});
  Tape tape;
  const ModelVars params = bind(tape, model);
  const InputVars inputs = bind_inputs(tape, model, item.inputs());
  const Var logits = forward_on_tape(tape, model, params, inputs, ForwardOptions{Mode::kTrain, cfg.dropout_p, &rng});
  const Var loss = tape.softmax_cross_entropy(logits, item.label);
  tape.backward(loss);
  const auto leaves = params.leaves();
  grads.resize(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) grads[i] = tape.grad(leaves[i]);
  return tape.value(loss).item();
}

void fold(BatchGradient& acc, double loss, const std::vector<Tensor>& grads) {
  acc.loss += loss;
  for (std::size_t p = 0; p < grads.size(); ++p) {
    auto dst = acc.grads[p].data();
    const auto src = grads[p].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learn_rate > 0.0)) throw DomainError("learn rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (batch_size < 1) throw DomainError("batch size must be at least 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw DomainError("dropout probability must lie in [0, 1)");
  if (max_epochs < 1) throw DomainError("max_epochs must be at least 1");
}

Split split_per_word(const Dataset& data, const SplitSpec& spec) {
  std::map<std::size_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data.items[i].label].push_back(i);

  enum class Part : std::uint8_t { kTrain, kVal, kTest };
  std::vector<Part> part(data.size(), Part::kTrain);
  const std::size_t needed = spec.val_per_word + spec.test_per_word;
  for (auto& [label, idx] : by_label) {
    if (idx.size() < needed) {
      throw DomainError("word " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                        " samples, needs at least " + std::to_string(needed) + " for validation and test");
    }
    Rng rng = Rng::keyed({spec.seed, kSplitStream, label});
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t j = 0; j < spec.val_per_word; ++j) part[idx[j]] = Part::kVal;
    for (std::size_t j = spec.val_per_word; j < needed; ++j) part[idx[j]] = Part::kTest;
  }
  Split s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Dataset& dst = part[i] == Part::kTrain ? s.train : part[i] == Part::kVal ? s.val : s.test;
    dst.items.push_back(data.items[i]);
  }
  return s;
}

void sgd_momentum_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double mu) {
  if (!param.same_shape(grad) || !param.same_shape(velocity)) {
    throw ShapeError("sgd_momentum_step: shapes " + param.shape_string() + ", " + grad.shape_string() + ", " +
                     velocity.shape_string() + " differ");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = mu * velocity[i] - lr * grad[i];
    param[i] += velocity[i];
  }
}

BatchGradient batch_gradient(const Model& model, const Dataset& data, std::span<const std::size_t> indices,
                             const TrainConfig& cfg, std::size_t epoch, Execution exec) {
  BatchGradient acc;
  for (const Tensor* p : model.parameters()) acc.grads.push_back(Tensor::zeros_like(*p));

  if (exec == Execution::kSerial || kernels::max_threads() == 1) {
    std::vector<Tensor> grads;
    for (std::size_t idx : indices) {
      const double loss = item_gradient(model, data.items.at(idx), cfg, epoch, idx, grads);
      fold(acc, loss, grads);
    }
    return acc;
  }

  // Chunks of one item per thread, folded in index order after each chunk.
  const std::size_t chunk = static_cast<std::size_t>(kernels::max_threads());
  std::vector<std::vector<Tensor>> grads(chunk);
  std::vector<double> losses(chunk);
  for (std::size_t start = 0; start < indices.size(); start += chunk) {
    const std::size_t n = std::min(chunk, indices.size() - start);
    std::exception_ptr error;
#pragma omp parallel for schedule(static, 1)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
      try {
        const std::size_t idx = indices[start + static_cast<std::size_t>(j)];
        losses[j] = item_gradient(model, data.items.at(idx), cfg, epoch, idx, grads[j]);
      } catch (...) {
#pragma omp critical
        error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    for (std::size_t j = 0; j < n; ++j) fold(acc, losses[j], grads[j]);
  }
  return acc;
}

std::size_t count_correct(const Model& model, const Dataset& data) {
  std::size_t correct = 0;
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Item& item = data.items[static_cast<std::size_t>(i)];
      if (predict(model, item.inputs()) == item.label) ++correct;
    } catch (...) {
#pragma omp critical
      error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return correct;
}

double evaluate(const Model& model, const Dataset& data) {
  if (data.empty()) throw DomainError("evaluate: empty dataset");
  return static_cast<double>(count_correct(model, data)) / static_cast<double>(data.size());
}

TrainResult train(Model model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw DomainError("train: empty training set");
  if (val_set.empty()) throw DomainError("train: empty validation set");

  std::vector<Tensor> velocity;
  for (const Tensor* p : model.parameters()) velocity.push_back(Tensor::zeros_like(*p));

  TrainResult result;
  result.model = model;
  double best = -1.0;
  std::size_t stale = 0;
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = Rng::keyed({cfg.seed, kShuffleStream, epoch});
    shuffle_rng.shuffle(order.begin(), order.end());

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      const BatchGradient g =
          batch_gradient(model, train_set, std::span(order).subspan(start, n), cfg, epoch, Execution::kParallel);
      if (!std::isfinite(g.loss)) {
        throw DivergenceError("training diverged: non-finite loss in epoch " + std::to_string(epoch));
      }
      epoch_loss += g.loss;
      auto params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        sgd_momentum_step(*params[p], g.grads[p], velocity[p], cfg.learn_rate, cfg.momentum);
      }
    }

    EpochRecord rec{epoch, epoch_loss / static_cast<double>(train_set.size()), evaluate(model, val_set)};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_accuracy > best) {
      best = rec.val_accuracy;
      result.model = model;
      result.best_epoch = epoch;
      result.best_val_accuracy = rec.val_accuracy;
      stale = 0;
    } else if (++stale >= cfg.patience && cfg.patience > 0) {
      break;
    }
  }
  return result;
}

void write_history(std::ostream& out, const std::vector<EpochRecord>& history) {
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", r.epoch, r.train_loss, r.val_accuracy);
    out << buf;
  }
}

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_history(out, history);
}

}  // namespace avf
