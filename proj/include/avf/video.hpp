#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "avf/features.hpp"
#include "avf/tensor.hpp"

namespace avf {

inline constexpr std::size_t kRoiWidth = 80;
inline constexpr std::size_t kRoiHeight = 40;
inline constexpr std::size_t kRoiPixels = kRoiWidth * kRoiHeight;

/// Grayscale mouth-ROI frames as stored on disk, row-major 80x40 bytes each.
struct RoiSequence {
  std::uint32_t frame_rate = 25;
  std::size_t n_frames = 0;
  std::vector<std::uint8_t> pixels;  // n_frames * kRoiPixels
};

// "AVU8" ROI file: magic, u32 n_frames, u32 dim (= 3200), u32 frame_rate_Hz,
// then n_frames * dim unsigned bytes.
void write_avu8(std::ostream& out, const RoiSequence& roi);
void write_avu8(const std::filesystem::path& path, const RoiSequence& roi);
RoiSequence read_avu8(std::istream& in);
RoiSequence read_avu8(const std::filesystem::path& path);

/// Packs every regular file in `dir` (sorted by name) as one 3200-byte raw
/// 80x40 grayscale frame.
RoiSequence roi_from_raw_frames(const std::filesystem::path& dir, std::uint32_t frame_rate = 25);

/// Pixels scaled by 1/255 into a T x 3200 video feature sequence.
FeatureSequence roi_features(const RoiSequence& roi);
FeatureSequence load_roi_sequence(const std::filesystem::path& path);

/// Repeats every frame `factor` times; frame rate is multiplied by factor.
FeatureSequence upsample_repeat(const FeatureSequence& seq, int factor = 4);

struct PcaBasis {
  Tensor mean;                     // [D]
  Tensor components;               // [k x D], orthonormal rows
  std::vector<double> explained;   // k eigenvalues, non-increasing

  std::size_t dim() const { return mean.size(); }
  std::size_t k() const { return components.rank() == 2 ? components.dim(0) : 0; }
};

/// Covariance eigendecomposition of N x D training frames keeping the top k
/// components. Each component's largest-magnitude entry is made positive.
PcaBasis pca_fit(const Tensor& frames, std::size_t k);

/// components * (frame - mean) for every frame.
FeatureSequence pca_transform(const PcaBasis& basis, const FeatureSequence& seq);

/// mean + components^T * code, per row of codes [T x k].
Tensor pca_reconstruct(const PcaBasis& basis, const Tensor& codes);

// "AVP1" basis file: magic, u32 dim, u32 k, then mean (D), components (k*D)
// and explained variances (k) as little-endian float64.
void write_pca(const std::filesystem::path& path, const PcaBasis& basis);
PcaBasis read_pca(const std::filesystem::path& path);

}  // namespace avf
