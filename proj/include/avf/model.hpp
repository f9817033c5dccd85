#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "avf/features.hpp"
#include "avf/layers.hpp"
#include "avf/rng.hpp"
#include "avf/tape.hpp"

namespace avf {

enum class ArchKind : std::uint32_t { kSingle = 0, kFusion = 1 };

/// Network topology. A fusion net "x+y" has x dense layers per modality, then
/// y joint layers whose last one is the LSTM. A single-modality net with n
/// layers is stored as n_separate = 0, n_joint = n, and reads whichever
/// input dimension is non-zero.
struct ArchSpec {
  ArchKind kind = ArchKind::kFusion;
  std::uint32_t n_separate = 0;
  std::uint32_t n_joint = 1;
  std::uint32_t width = 128;
  std::uint32_t in_dim_audio = 0;
  std::uint32_t in_dim_video = 0;
  std::uint32_t n_classes = 51;

  bool uses_audio() const { return kind == ArchKind::kFusion || in_dim_audio > 0; }
  bool uses_video() const { return kind == ArchKind::kFusion || in_dim_video > 0; }
  /// Width of the vector entering the joint network.
  std::size_t joint_input_dim() const;
  /// "x+y" for fusion, "single:n" otherwise.
  std::string name() const;

  bool operator==(const ArchSpec&) const = default;
};

struct Model {
  ArchSpec spec;
  std::vector<DenseParams> audio_branch;
  std::vector<DenseParams> video_branch;
  std::vector<DenseParams> joint_dense;
  LstmParams lstm;
  DenseParams output;

  /// Every parameter tensor in checkpoint order: audio branch, video branch,
  /// joint dense (W then b each), LSTM gates i,f,o,c (W, U, b), output.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;

  bool operator==(const Model&) const = default;
};

Model build_single(int n_layers, int width, int in_dim, int n_classes, Rng& rng, Modality modality = Modality::kAudio);
Model build_fusion(int n_separate, int n_joint, int width, int in_dim_audio, int in_dim_video, int n_classes,
                   Rng& rng);

/// Optional per-modality inputs for one utterance.
struct Inputs {
  const FeatureSequence* audio = nullptr;
  const FeatureSequence* video = nullptr;
};

struct ForwardOptions {
  Mode mode = Mode::kEval;
  double dropout_p = 0.5;
  Rng* rng = nullptr;  // required in train mode when dropout_p > 0
};

/// Model parameters bound as tape leaves, in parameters() order.
struct ModelVars {
  std::vector<DenseVars> audio_branch;
  std::vector<DenseVars> video_branch;
  std::vector<DenseVars> joint_dense;
  LstmVars lstm;
  DenseVars output;

  std::vector<Var> leaves() const;
};

ModelVars bind(Tape& tape, const Model& model);

/// Input frames bound as tape leaves, one rank-1 leaf per frame.
struct InputVars {
  std::vector<Var> audio;
  std::vector<Var> video;
};

/// Validates `in` against the model (modalities present, dims, equal
/// lengths, T >= 1) and records every frame as a leaf.
InputVars bind_inputs(Tape& tape, const Model& model, const Inputs& in);

/// Runs the network over all frames and returns the last-frame logits.
Var forward_on_tape(Tape& tape, const Model& model, const ModelVars& params, const InputVars& inputs,
                    const ForwardOptions& opts);

Tensor forward_last_frame(const Model& model, const Inputs& in, const ForwardOptions& opts = {});

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Eval-mode argmax of the last-frame logits.
std::size_t predict(const Model& model, const Inputs& in);

// "AVNN" checkpoint: magic, u32 version, the seven ArchSpec fields as u32 in
// declaration order, then every parameter as float64, all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Model& model);
void write_checkpoint(const std::filesystem::path& path, const Model& model);
Model read_checkpoint(std::istream& in);
Model read_checkpoint(const std::filesystem::path& path);

}  // namespace avf
