#include "avf/synthdata.hpp"

#include <algorithm>
#include <cmath>

#include "avf/error.hpp"
#include "avf/rng.hpp"

namespace avf::synth {

namespace {

constexpr std::uint64_t kProtoStream = 0x5052'4f54;   // "PROT"
constexpr std::uint64_t kLengthStream = 0x4c45'4e47;  // "LENG"
constexpr std::uint64_t kNoiseStream = 0x4e4f'4953;   // "NOIS"

std::uint64_t modality_key(Modality m) { return m == Modality::kAudio ? 0 : 1; }

FeatureSequence noisy_sample(const Tensor& proto, std::size_t length, double sigma, Rng& rng, Modality m) {
  Tensor frames = resample(proto, length);
  // Draws happen even at sigma 0 so the stream position never depends on sigma.
  for (double& x : frames.data()) x += sigma * rng.normal();
  return FeatureSequence(m, 100.0, std::move(frames));
}

}  // namespace

void SynthConfig::validate() const {
  if (n_classes < 2) throw DomainError("synth: need at least 2 classes");
  if (samples_per_class < 1) throw DomainError("synth: need at least one sample per class");
  if (min_len < 1 || max_len < min_len) throw DomainError("synth: need 1 <= min_len <= max_len");
  if (dim_a < 1 || dim_b < 1) throw DomainError("synth: feature dimensions must be positive");
  if (!(sigma_a >= 0.0) || !(sigma_b >= 0.0)) throw DomainError("synth: noise levels must be >= 0");
}

Tensor prototype(const SynthConfig& cfg, std::size_t cls, Modality modality) {
  const std::size_t dim = modality == Modality::kAudio ? cfg.dim_a : cfg.dim_b;
  const std::size_t len = cfg.max_len;
  Rng rng = Rng::keyed({cfg.seed, kProtoStream, cls, modality_key(modality)});
  Tensor p({len, dim});
  for (std::size_t j = 0; j < dim; ++j) {
    double walk = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      walk += rng.normal();
      p.at(t, j) = walk;
    }
  }
  double peak = 0.0;
  for (double x : p.data()) peak = std::max(peak, std::abs(x));
  if (peak > 0.0) {
    for (double& x : p.data()) x /= peak;
  }
  return p;
}

Tensor resample(const Tensor& proto, std::size_t length) {
  if (length == 0) throw DomainError("resample: zero length");
  const std::size_t src = proto.dim(0), dim = proto.dim(1);
  Tensor out({length, dim});
  for (std::size_t t = 0; t < length; ++t) {
    const double pos = length == 1 ? 0.0 : static_cast<double>(t) * static_cast<double>(src - 1) / (length - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, src - 1);
    const double frac = pos - static_cast<double>(lo);
    for (std::size_t j = 0; j < dim; ++j) out.at(t, j) = (1.0 - frac) * proto.at(lo, j) + frac * proto.at(hi, j);
  }
  return out;
}

Dataset generate(const SynthConfig& cfg) {
  cfg.validate();
  Dataset d;
  d.items.reserve(cfg.n_classes * cfg.samples_per_class);
  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    const Tensor proto_a = prototype(cfg, c, Modality::kAudio);
    const Tensor proto_b = prototype(cfg, c, Modality::kVideo);
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
      Rng len_rng = Rng::keyed({cfg.seed, kLengthStream, c, s});
      const std::size_t length = cfg.min_len + len_rng.below(cfg.max_len - cfg.min_len + 1);
      Rng noise_a = Rng::keyed({cfg.seed, kNoiseStream, c, s, modality_key(Modality::kAudio)});
      Rng noise_b = Rng::keyed({cfg.seed, kNoiseStream, c, s, modality_key(Modality::kVideo)});
      Item item;
      item.utterance_id = "c" + std::to_string(c) + "_s" + std::to_string(s);
      item.speaker_id = "synth" + std::to_string(cfg.seed);
      item.label = c;
      item.audio = noisy_sample(proto_a, length, cfg.sigma_a, noise_a, Modality::kAudio);
      item.video = noisy_sample(proto_b, length, cfg.sigma_b, noise_b, Modality::kVideo);
      d.items.push_back(std::move(item));
    }
  }
  return d;
}

std::filesystem::path write_dataset(const Dataset& data, const std::filesystem::path& dir,
                                    const std::string& manifest_name) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const Item& item : data.items) {
    ManifestEntry e;
    e.utterance_id = item.utterance_id;
    e.speaker_id = item.speaker_id;
    e.label = item.label;
    if (item.audio) {
      e.audio_path = item.utterance_id + ".a.avf";
      write_avf1(dir / e.audio_path, *item.audio);
    }
    if (item.video) {
      e.video_path = item.utterance_id + ".v.avf";
      write_avf1(dir / e.video_path, *item.video);
    }
    entries.push_back(std::move(e));
  }
  const auto manifest = dir / manifest_name;
  write_manifest(manifest, entries);
  return manifest;
}

std::vector<BenchmarkSeed> monotonicity_benchmark(const SynthConfig& base, const std::vector<std::uint64_t>& seeds,
                                                  const std::vector<double>& sigma_a_levels, const SplitSpec& split) {
  if (sigma_a_levels.size() < 2) throw DomainError("monotonicity benchmark needs at least two noise levels");
  std::vector<BenchmarkSeed> out;
  for (std::uint64_t seed : seeds) {
    BenchmarkSeed bs;
    bs.seed = seed;
    for (double sigma : sigma_a_levels) {
      SynthConfig cfg = base;
      cfg.seed = seed;
      cfg.sigma_a = sigma;
      SplitSpec sp = split;
      sp.seed = seed;
      bs.levels.push_back(BenchmarkLevel{sigma, split_per_word(generate(cfg), sp)});
    }
    out.push_back(std::move(bs));
  }
  return out;
}

}  // namespace avf::synth
