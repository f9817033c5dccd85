#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "avf/dataset.hpp"
#include "avf/model.hpp"

namespace avf {

/// Which output the class score reads: the last-frame logit (default) or its
/// softmax probability.
enum class ScoreMode { kLogit, kProbability };

/// S_c for an utterance, evaluated with dropout off.
double class_score(const Model& model, const Inputs& in, std::size_t c, ScoreMode mode = ScoreMode::kLogit);

/// |dS_c / dinput| per frame and feature. A modality the model does not read
/// yields an empty (0-frame) map.
struct SaliencyMaps {
  Tensor audio;  // [T x d_A] or empty
  Tensor video;  // [T x d_V] or empty
};

SaliencyMaps saliency_maps(const Model& model, const Inputs& in, std::size_t c, ScoreMode mode = ScoreMode::kLogit);

/// (1/T) * sum_t sum_i M[t][i]
double modality_saliency(const Tensor& map);

struct SequenceSaliency {
  std::string utterance_id;
  double audio = 0.0;
  double video = 0.0;
};

struct SaliencySummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single sequence
};

struct SaliencyReport {
  std::vector<SequenceSaliency> sequences;
  SaliencySummary audio;
  SaliencySummary video;
};

/// Per-sequence saliency w.r.t. each item's own label, aggregated over the
/// set. Modalities the model does not read contribute 0.
SaliencyReport speaker_saliency(const Model& model, const Dataset& eval_set, ScoreMode mode = ScoreMode::kLogit);

/// One "utterance audio video" line per sequence, then
/// "mean audio_mean audio_sd video_mean video_sd", 6 significant digits.
void write_report(std::ostream& out, const SaliencyReport& report);
void write_report(const std::filesystem::path& path, const SaliencyReport& report);

}  // namespace avf
