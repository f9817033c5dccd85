#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "avf/dataset.hpp"
#include "avf/trainer.hpp"

namespace avf::synth {

/// Two-modality stand-in for a word-classification corpus: each class has a
/// smooth prototype trajectory per modality and samples are noisy,
/// length-resampled copies of it. Modality A plays audio, B plays video.
struct SynthConfig {
  std::size_t n_classes = 51;
  std::size_t samples_per_class = 20;
  std::size_t min_len = 8;
  std::size_t max_len = 16;
  std::size_t dim_a = 27;
  std::size_t dim_b = 32;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Prototype of class c in one modality, [prototype_len x dim], values in
/// [-1, 1]: a per-feature cumulative sum of Gaussian steps scaled by its
/// largest magnitude.
Tensor prototype(const SynthConfig& cfg, std::size_t cls, Modality modality);

/// Linear interpolation of the rows of `proto` onto `length` frames.
Tensor resample(const Tensor& proto, std::size_t length);

/// Items are ordered by class, then sample index. Lengths, noise of A and
/// noise of B come from separate streams keyed by (seed, class, sample), so
/// changing sigma_a leaves the B stream bit-identical.
Dataset generate(const SynthConfig& cfg);

/// Writes one AVF1 file per item and modality into `dir` together with a
/// manifest "manifest.txt"; returns the manifest path.
std::filesystem::path write_dataset(const Dataset& data, const std::filesystem::path& dir,
                                    const std::string& manifest_name = "manifest.txt");

struct BenchmarkLevel {
  double sigma_a = 0.0;
  Split split;
};

struct BenchmarkSeed {
  std::uint64_t seed = 0;
  std::vector<BenchmarkLevel> levels;
};

/// For each seed and each sigma_a level (everything else from `base`), a
/// train/val/test triple with shared prototypes and an identical B stream.
std::vector<BenchmarkSeed> monotonicity_benchmark(const SynthConfig& base, const std::vector<std::uint64_t>& seeds,
                                                  const std::vector<double>& sigma_a_levels,
                                                  const SplitSpec& split = {});

}  // namespace avf::synth
