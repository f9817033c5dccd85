#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "avf/dataset.hpp"
#include "avf/error.hpp"
#include "avf/model.hpp"

namespace avf {

/// Training recipe. The loss is *summed* over the words of a minibatch, so
/// the effective step size grows with batch_size.
struct TrainConfig {
  double learn_rate = 0.001;
  double momentum = 0.5;
  std::size_t batch_size = 64;
  double dropout_p = 0.5;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;  // epochs without validation improvement; 0 disables
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitSpec {
  std::size_t val_per_word = 5;
  std::size_t test_per_word = 5;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Per label, a seeded shuffle sends val_per_word items to val, the next
/// test_per_word to test and the rest to train. Each split keeps the input
/// order.
Split split_per_word(const Dataset& data, const SplitSpec& spec);

/// v' = mu * v - lr * g ; p' = p + v'
void sgd_momentum_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double mu);

enum class Execution { kSerial, kParallel };

struct BatchGradient {
  double loss = 0.0;            // summed last-frame cross-entropy
  std::vector<Tensor> grads;    // Model::parameters() order
};

/// Summed loss and gradient over `indices`. Item i uses the dropout stream
/// keyed by (seed, epoch, i). Per-item results are folded in index order, so
/// both execution modes give bit-identical sums.
BatchGradient batch_gradient(const Model& model, const Dataset& data, std::span<const std::size_t> indices,
                             const TrainConfig& cfg, std::size_t epoch, Execution exec = Execution::kParallel);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-word loss over the epoch
  double val_accuracy = 0.0;
};

struct TrainResult {
  Model model;  // best validation accuracy seen
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

TrainResult train(Model model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Fraction of items whose eval-mode prediction equals the label.
double evaluate(const Model& model, const Dataset& data);
/// Number of correct predictions.
std::size_t count_correct(const Model& model, const Dataset& data);

/// "epoch train_loss val_accuracy" per line.
void write_history(std::ostream& out, const std::vector<EpochRecord>& history);
void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace avf
