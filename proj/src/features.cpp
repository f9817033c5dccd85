#include "avf/features.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "avf/binary_io.hpp"
#include "avf/error.hpp"

namespace avf {

std::string_view to_string(Modality m) { return m == Modality::kAudio ? "audio" : "video"; }

FeatureSequence::FeatureSequence(Modality m, double rate, Tensor f) : modality(m), frame_rate(rate), frames(std::move(f)) {
  if (frames.rank() != 2 || frames.dim(0) == 0) {
    throw ShapeError("feature sequence needs a non-empty T x d matrix, got " + frames.shape_string());
  }
}

void write_avf1(std::ostream& out, const FeatureSequence& seq) {
  const double rate = std::round(seq.frame_rate);
  if (rate < 0 || rate > std::numeric_limits<std::uint32_t>::max()) throw DomainError("frame rate not representable");
  io::write_magic(out, "AVF1");
  io::write_u32(out, static_cast<std::uint32_t>(seq.n_frames()));
  io::write_u32(out, static_cast<std::uint32_t>(seq.dim()));
  io::write_u32(out, static_cast<std::uint32_t>(rate));
  for (double x : seq.frames.data()) io::write_f32(out, static_cast<float>(x));
  if (!out) throw Error("AVF1: write failed");
}

void write_avf1(const std::filesystem::path& path, const FeatureSequence& seq) {
  auto out = io::open_output(path);
  write_avf1(out, seq);
}

FeatureSequence read_avf1(std::istream& in, Modality modality) {
  const std::string what = "AVF1";
  io::expect_magic(in, "AVF1", what);
  const std::uint32_t n = io::read_u32(in, what);
  const std::uint32_t d = io::read_u32(in, what);
  const std::uint32_t rate = io::read_u32(in, what);
  if (n == 0 || d == 0) throw FormatError("AVF1: empty feature matrix");
  // Grow row by row so a corrupt header cannot force a huge allocation.
  std::vector<double> values;
  for (std::uint32_t t = 0; t < n; ++t)
    for (std::uint32_t j = 0; j < d; ++j) values.push_back(io::read_f32(in, what));
  return FeatureSequence(modality, static_cast<double>(rate), Tensor({n, d}, std::move(values)));
}

FeatureSequence read_avf1(const std::filesystem::path& path, Modality modality) {
  auto in = io::open_input(path);
  try {
    return read_avf1(in, modality);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace avf
