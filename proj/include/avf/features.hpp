#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "avf/tensor.hpp"

namespace avf {

enum class Modality { kAudio, kVideo };

std::string_view to_string(Modality m);

inline constexpr std::size_t kAudioBands = 27;

/// T x d frame matrix of one utterance in one modality.
struct FeatureSequence {
  Modality modality = Modality::kAudio;
  double frame_rate = 100.0;
  Tensor frames{Tensor::Shape{0}};  // [T x d]

  FeatureSequence() = default;
  FeatureSequence(Modality m, double rate, Tensor f);

  std::size_t n_frames() const { return frames.rank() == 2 ? frames.dim(0) : 0; }
  std::size_t dim() const { return frames.rank() == 2 ? frames.dim(1) : 0; }
  std::span<const double> frame(std::size_t t) const { return frames.data().subspan(t * dim(), dim()); }
  std::span<double> frame(std::size_t t) { return frames.data().subspan(t * dim(), dim()); }

  bool operator==(const FeatureSequence&) const = default;
};

// "AVF1" feature file: magic, u32 n_frames, u32 dim, u32 frame_rate_Hz, then
// n_frames*dim little-endian float32 values, row-major.
void write_avf1(std::ostream& out, const FeatureSequence& seq);
void write_avf1(const std::filesystem::path& path, const FeatureSequence& seq);
FeatureSequence read_avf1(std::istream& in, Modality modality);
FeatureSequence read_avf1(const std::filesystem::path& path, Modality modality);

}  // namespace avf
