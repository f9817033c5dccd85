#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "avf/error.hpp"
#include "avf/rng.hpp"
#include "avf/video.hpp"
#include "doctest.h"

using namespace avf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("avf_test_video_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols});
  for (double& x : t.data()) x = rng.normal();
  return t;
}

// Mean squared reconstruction error of `x` through the basis.
double reconstruction_error(const PcaBasis& b, const Tensor& x) {
  const FeatureSequence codes = pca_transform(b, FeatureSequence(Modality::kVideo, 100.0, x));
  const Tensor back = pca_reconstruct(b, codes.frames);
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) e += (back[i] - x[i]) * (back[i] - x[i]);
  return e / static_cast<double>(x.size());
}

void check_orthonormal(const PcaBasis& b) {
  for (std::size_t i = 0; i < b.k(); ++i)
    for (std::size_t j = 0; j < b.k(); ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < b.dim(); ++d) s += b.components.at(i, d) * b.components.at(j, d);
      CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
}

}  // namespace

TEST_CASE("AVU8 examples") {
  RoiSequence roi;
  roi.n_frames = 2;
  roi.pixels.assign(2 * kRoiPixels, 0);
  roi.pixels[kRoiPixels + 5] = 255;
  roi.pixels[kRoiPixels + 6] = 51;
  std::stringstream ss;
  write_avu8(ss, roi);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "AVU8");
  CHECK(bytes.size() == 16 + 2 * kRoiPixels);

  std::istringstream in(bytes);
  const RoiSequence back = read_avu8(in);
  CHECK(back.n_frames == 2);
  CHECK(back.frame_rate == 25);
  CHECK(back.pixels == roi.pixels);

  const FeatureSequence f = roi_features(back);
  CHECK(f.n_frames() == 2);
  CHECK(f.dim() == 3200);
  CHECK(f.frame_rate == 25.0);
  for (std::size_t i = 0; i < kRoiPixels; ++i) CHECK(f.frames.at(0, i) == 0.0);
  CHECK(f.frames.at(1, 5) == 1.0);
  CHECK(f.frames.at(1, 6) == doctest::Approx(0.2));

  std::istringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_avu8(truncated), FormatError);
  std::istringstream magic("AVF1" + bytes.substr(4));
  CHECK_THROWS_AS(read_avu8(magic), FormatError);
  std::string wrong_dim = bytes;
  wrong_dim[8] = 1;  // dim 3200 -> 3201
  std::istringstream dim(wrong_dim);
  CHECK_THROWS_AS(read_avu8(dim), FormatError);
}

TEST_CASE("raw frame directory conversion") {
  const fs::path dir = scratch_dir("raw");
  for (int i = 0; i < 3; ++i) {
    std::ofstream out(dir / ("frame" + std::to_string(i) + ".raw"), std::ios::binary);
    const std::string frame(kRoiPixels, static_cast<char>(10 * i));
    out << frame;
  }
  const RoiSequence roi = roi_from_raw_frames(dir, 25);
  CHECK(roi.n_frames == 3);
  CHECK(roi.pixels[0] == 0);
  CHECK(roi.pixels[kRoiPixels] == 10);
  CHECK(roi.pixels[2 * kRoiPixels + 17] == 20);

  write_avu8(dir / "seq.avu8", roi);
  const FeatureSequence f = load_roi_sequence(dir / "seq.avu8");
  CHECK(f.n_frames() == 3);
  CHECK(f.frames.at(2, 0) == doctest::Approx(20.0 / 255.0));

  std::ofstream(dir / "short.raw", std::ios::binary) << std::string(100, 'x');
  CHECK_THROWS_AS(roi_from_raw_frames(dir, 25), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("upsample by repetition") {
  const FeatureSequence s(Modality::kVideo, 25.0, Tensor::matrix({{1, 2}, {3, 4}}));
  const FeatureSequence u = upsample_repeat(s, 4);
  CHECK(u.n_frames() == 8);
  CHECK(u.frame_rate == 100.0);
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(u.frames.at(t, 0) == (t < 4 ? 1.0 : 3.0));
    CHECK(u.frames.at(t, 1) == (t < 4 ? 2.0 : 4.0));
  }
  CHECK(upsample_repeat(s, 1).frames == s.frames);
  CHECK_THROWS_AS(upsample_repeat(s, 0), DomainError);

  Rng rng(61);
  const FeatureSequence r(Modality::kVideo, 25.0, random_matrix(7, 5, rng));
  const FeatureSequence ru = upsample_repeat(r, 3);
  CHECK(ru.n_frames() == 21);
  for (std::size_t t = 0; t < 21; ++t)
    for (std::size_t d = 0; d < 5; ++d) CHECK(ru.frames.at(t, d) == r.frames.at(t / 3, d));
}

TEST_CASE("PCA on the 2-D toy covariance") {
  // Four centered points whose scatter is 3 * [[2,1],[1,2]].
  const double a = 1.5, b = std::sqrt(3.0) / 2.0;
  const Tensor x = Tensor::matrix({{a, a}, {-a, -a}, {b, -b}, {-b, b}});
  const PcaBasis basis = pca_fit(x, 2);
  CHECK(basis.explained[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(basis.explained[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(basis.components.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(basis.components.at(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(basis.mean[0]) < 1e-15);
  CHECK(reconstruction_error(basis, x) < 1e-8);
}

TEST_CASE("PCA components are eigenvectors of an independently computed covariance") {
  Rng rng(62);
  const std::size_t n = 60, d = 6;
  Tensor x = random_matrix(n, d, rng);
  for (std::size_t r = 0; r < n; ++r) x.at(r, 2) = 3.0 * x.at(r, 0) + 0.1 * x.at(r, 2);  // correlated pair
  std::vector<long double> mean(d, 0.0L), cov(d * d, 0.0L);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x.at(r, j) / static_cast<long double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = 0; q < d; ++q) cov[p * d + q] += (x.at(r, p) - mean[p]) * (x.at(r, q) - mean[q]) / (n - 1.0L);

  const PcaBasis b = pca_fit(x, d);
  check_orthonormal(b);
  for (std::size_t i = 0; i < d; ++i) {
    if (i > 0) CHECK(b.explained[i] <= b.explained[i - 1]);
    std::size_t biggest = 0;
    for (std::size_t p = 0; p < d; ++p) {
      long double cv = 0.0L;
      for (std::size_t q = 0; q < d; ++q) cv += cov[p * d + q] * b.components.at(i, q);
      CHECK(std::abs(static_cast<double>(cv) - b.explained[i] * b.components.at(i, p)) < 1e-10);
      if (std::abs(b.components.at(i, p)) > std::abs(b.components.at(i, biggest))) biggest = p;
    }
    CHECK(b.components.at(i, biggest) > 0.0);
  }
  CHECK(reconstruction_error(b, x) < 1e-8);
}

TEST_CASE("PCA on data in an affine subspace and k sweeps") {
  Rng rng(63);
  const std::size_t n = 80, d = 12, k = 3;
  const Tensor basis = random_matrix(k, d, rng);
  const Tensor coeff = random_matrix(n, k, rng);
  Tensor x({n, d});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) {
      double v = 5.0 + j;  // offset
      for (std::size_t c = 0; c < k; ++c) v += coeff.at(r, c) * basis.at(c, j);
      x.at(r, j) = v;
    }
  CHECK(reconstruction_error(pca_fit(x, k), x) < 1e-8);

  const Tensor noise = random_matrix(n, d, rng);
  double previous = INFINITY;
  for (std::size_t kk = 1; kk <= d; ++kk) {
    const PcaBasis b = pca_fit(noise, kk);
    check_orthonormal(b);
    const double e = reconstruction_error(b, noise);
    CHECK(e <= previous + 1e-15);
    previous = e;
  }
  CHECK(previous < 1e-8);
}

TEST_CASE("PCA transform examples and errors") {
  Rng rng(64);
  const Tensor x = random_matrix(30, 5, rng);
  const PcaBasis b = pca_fit(x, 3);
  Tensor probe({4, 5});
  for (std::size_t j = 0; j < 5; ++j) {
    probe.at(0, j) = b.mean[j];
    for (std::size_t i = 0; i < 3; ++i) probe.at(i + 1, j) = b.mean[j] + b.components.at(i, j);
  }
  const FeatureSequence codes = pca_transform(b, FeatureSequence(Modality::kVideo, 100.0, probe));
  CHECK(codes.dim() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(codes.frames.at(0, i)) < 1e-12);
  for (std::size_t r = 1; r <= 3; ++r)
    for (std::size_t i = 0; i < 3; ++i) CHECK(codes.frames.at(r, i) == doctest::Approx(r - 1 == i ? 1.0 : 0.0).epsilon(1e-12));

  CHECK_THROWS_AS(pca_fit(x, 0), DomainError);
  CHECK_THROWS_AS(pca_fit(x, 6), DomainError);
  CHECK_THROWS_AS(pca_fit(random_matrix(2, 5, rng), 3), DomainError);
  CHECK_THROWS_AS(pca_transform(b, FeatureSequence(Modality::kVideo, 100.0, random_matrix(2, 4, rng))), ShapeError);
}

TEST_CASE("AVP1 round trip") {
  Rng rng(65);
  const PcaBasis b = pca_fit(random_matrix(20, 6, rng), 4);
  const fs::path dir = scratch_dir("pca");
  write_pca(dir / "basis.avp1", b);
  const PcaBasis r = read_pca(dir / "basis.avp1");
  CHECK(r.mean == b.mean);
  CHECK(r.components == b.components);
  CHECK(r.explained == b.explained);
  std::ofstream(dir / "junk.avp1", std::ios::binary) << "AVP2xxxxxxxx";
  CHECK_THROWS_AS(read_pca(dir / "junk.avp1"), FormatError);
  fs::remove_all(dir);
}
