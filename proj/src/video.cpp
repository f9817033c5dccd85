#include "avf/video.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "avf/binary_io.hpp"
#include "avf/error.hpp"
#include "avf/kernels.hpp"

namespace avf {

void write_avu8(std::ostream& out, const RoiSequence& roi) {
  if (roi.pixels.size() != roi.n_frames * kRoiPixels) throw ShapeError("AVU8: pixel count does not match frame count");
  io::write_magic(out, "AVU8");
  io::write_u32(out, static_cast<std::uint32_t>(roi.n_frames));
  io::write_u32(out, static_cast<std::uint32_t>(kRoiPixels));
  io::write_u32(out, roi.frame_rate);
  out.write(reinterpret_cast<const char*>(roi.pixels.data()), static_cast<std::streamsize>(roi.pixels.size()));
  if (!out) throw Error("AVU8: write failed");
}

void write_avu8(const std::filesystem::path& path, const RoiSequence& roi) {
  auto out = io::open_output(path);
  write_avu8(out, roi);
}

RoiSequence read_avu8(std::istream& in) {
  const std::string what = "AVU8";
  io::expect_magic(in, "AVU8", what);
  RoiSequence roi;
  roi.n_frames = io::read_u32(in, what);
  const std::uint32_t dim = io::read_u32(in, what);
  roi.frame_rate = io::read_u32(in, what);
  if (dim != kRoiPixels) {
    throw FormatError("AVU8: frame dimension " + std::to_string(dim) + ", expected " + std::to_string(kRoiPixels));
  }
  if (roi.n_frames == 0) throw FormatError("AVU8: no frames");
  // Read in frame-sized pieces so a corrupt count cannot force a huge allocation.
  std::vector<char> frame(kRoiPixels);
  for (std::size_t f = 0; f < roi.n_frames; ++f) {
    io::read_bytes(in, frame.data(), frame.size(), what);
    roi.pixels.insert(roi.pixels.end(), frame.begin(), frame.end());
  }
  return roi;
}

RoiSequence read_avu8(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return read_avu8(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

RoiSequence roi_from_raw_frames(const std::filesystem::path& dir, std::uint32_t frame_rate) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(dir.string() + " contains no frame files");
  RoiSequence roi;
  roi.frame_rate = frame_rate;
  for (const auto& file : files) {
    if (std::filesystem::file_size(file) != kRoiPixels) {
      throw FormatError(file.string() + ": expected a raw 80x40 8-bit frame of " + std::to_string(kRoiPixels) +
                        " bytes");
    }
    auto in = io::open_input(file);
    std::vector<char> frame(kRoiPixels);
    io::read_bytes(in, frame.data(), frame.size(), file.string());
    roi.pixels.insert(roi.pixels.end(), frame.begin(), frame.end());
    ++roi.n_frames;
  }
  return roi;
}

FeatureSequence roi_features(const RoiSequence& roi) {
  Tensor frames({roi.n_frames, kRoiPixels});
  for (std::size_t i = 0; i < roi.pixels.size(); ++i) frames[i] = roi.pixels[i] / 255.0;
  return FeatureSequence(Modality::kVideo, roi.frame_rate, std::move(frames));
}

FeatureSequence load_roi_sequence(const std::filesystem::path& path) { return roi_features(read_avu8(path)); }

FeatureSequence upsample_repeat(const FeatureSequence& seq, int factor) {
  if (factor < 1) throw DomainError("upsampling factor must be >= 1, got " + std::to_string(factor));
  const std::size_t T = seq.n_frames(), d = seq.dim();
  const auto f = static_cast<std::size_t>(factor);
  Tensor out({T * f, d});
  for (std::size_t t = 0; t < T; ++t) {
    const auto src = seq.frame(t);
    for (std::size_t r = 0; r < f; ++r) std::copy(src.begin(), src.end(), out.data().begin() + (t * f + r) * d);
  }
  return FeatureSequence(seq.modality, seq.frame_rate * factor, std::move(out));
}

PcaBasis pca_fit(const Tensor& frames, std::size_t k) {
  if (frames.rank() != 2) throw ShapeError("pca_fit expects an N x D matrix, got " + frames.shape_string());
  const std::size_t N = frames.dim(0), D = frames.dim(1);
  if (k < 1 || k > std::min(N, D)) {
    throw DomainError("pca_fit: k = " + std::to_string(k) + " must lie in [1, min(N, D)] = [1, " +
                      std::to_string(std::min(N, D)) + "]");
  }
  PcaBasis basis;
  basis.mean = Tensor({D});
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < D; ++c) basis.mean[c] += frames.at(r, c);
  for (double& m : basis.mean.data()) m /= static_cast<double>(N);

  std::vector<double> cov(D * D);
  kernels::covariance(N, D, frames.data().data(), basis.mean.data().data(), cov.data());

  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> cov_map(
      cov.data(), static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_map);
  if (solver.info() != Eigen::Success) throw Error("pca_fit: eigendecomposition did not converge");

  // Eigen returns ascending eigenvalues.
  basis.components = Tensor({k, D});
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = static_cast<Eigen::Index>(D - 1 - i);
    basis.explained.push_back(solver.eigenvalues()(col));
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t c = 0; c < D; ++c) basis.components.at(i, c) = v(static_cast<Eigen::Index>(c));
  }
  return basis;
}

FeatureSequence pca_transform(const PcaBasis& basis, const FeatureSequence& seq) {
  if (seq.dim() != basis.dim()) {
    throw ShapeError("pca_transform: features have dim " + std::to_string(seq.dim()) + ", basis expects " +
                     std::to_string(basis.dim()));
  }
  const std::size_t T = seq.n_frames(), D = basis.dim(), k = basis.k();
  Tensor centered({T, D});
  for (std::size_t t = 0; t < T; ++t) {
    const auto f = seq.frame(t);
    for (std::size_t c = 0; c < D; ++c) centered.at(t, c) = f[c] - basis.mean[c];
  }
  // codes[T x k] = centered[T x D] * components^T
  Tensor codes({T, k});
  kernels::gemm_nt_acc(T, D, k, centered.data().data(), basis.components.data().data(), codes.data().data());
  return FeatureSequence(seq.modality, seq.frame_rate, std::move(codes));
}

Tensor pca_reconstruct(const PcaBasis& basis, const Tensor& codes) {
  if (codes.rank() != 2 || codes.dim(1) != basis.k()) throw ShapeError("pca_reconstruct: code width mismatch");
  const std::size_t T = codes.dim(0), D = basis.dim();
  Tensor out({T, D});
  kernels::gemm_nn(T, basis.k(), D, codes.data().data(), basis.components.data().data(), out.data().data(), false);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < D; ++c) out.at(t, c) += basis.mean[c];
  return out;
}

void write_pca(const std::filesystem::path& path, const PcaBasis& basis) {
  auto out = io::open_output(path);
  io::write_magic(out, "AVP1");
  io::write_u32(out, static_cast<std::uint32_t>(basis.dim()));
  io::write_u32(out, static_cast<std::uint32_t>(basis.k()));
  for (double x : basis.mean.data()) io::write_f64(out, x);
  for (double x : basis.components.data()) io::write_f64(out, x);
  for (double x : basis.explained) io::write_f64(out, x);
  if (!out) throw Error("AVP1: write failed");
}

PcaBasis read_pca(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  const std::string what = path.string() + ": AVP1";
  io::expect_magic(in, "AVP1", what);
  const std::uint32_t D = io::read_u32(in, what);
  const std::uint32_t k = io::read_u32(in, what);
  if (D == 0 || k == 0 || k > D) throw FormatError(what + ": invalid dimensions");
  PcaBasis basis;
  basis.mean = Tensor({D});
  for (double& x : basis.mean.data()) x = io::read_f64(in, what);
  basis.components = Tensor({k, D});
  for (double& x : basis.components.data()) x = io::read_f64(in, what);
  for (std::uint32_t i = 0; i < k; ++i) basis.explained.push_back(io::read_f64(in, what));
  return basis;
}

}  // namespace avf
