#include "avf/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "avf/binary_io.hpp"
#include "avf/error.hpp"
#include "avf/rng.hpp"

namespace avf {

namespace {

// FFTW's planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(double* p) const { fftw_free(p); }
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_.reset(fftw_alloc_real(n));
    out_.reset(fftw_alloc_complex(n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW plan creation failed");
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }

  /// |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    const fftw_complex* spec = out_.get();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::size_t samples_for_ms(double ms, std::uint32_t sample_rate) {
  if (!(ms > 0.0) || sample_rate == 0) throw DomainError("window length and sample rate must be positive");
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

Tensor frame_signal(const Waveform& w, double win_ms, double shift_ms) {
  const std::size_t W = samples_for_ms(win_ms, w.sample_rate);
  const std::size_t S = samples_for_ms(shift_ms, w.sample_rate);
  const std::size_t N = w.samples.size();
  if (W == 0 || S == 0) throw DomainError("window or shift rounds to zero samples");
  if (N < W) {
    throw DomainError("signal of " + std::to_string(N) + " samples is shorter than one " + std::to_string(W) +
                      "-sample window");
  }
  const std::size_t n_frames = (N - W) / S + 1;
  Tensor frames({n_frames, W});
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(f * S), W, frames.data().begin() + f * W);
  }
  return frames;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

MelFilterbank make_mel_filterbank(std::uint32_t sample_rate, std::size_t n_fft, const MelConfig& cfg) {
  const std::size_t n_bins = n_fft / 2 + 1;
  if (cfg.n_bands == 0) throw DomainError("filterbank needs at least one band");
  if (n_bins < cfg.n_bands + 2) {
    throw DomainError("sample rate " + std::to_string(sample_rate) + " Hz with a " + std::to_string(n_fft) +
                      "-point FFT gives " + std::to_string(n_bins) + " bins, too few for " +
                      std::to_string(cfg.n_bands) + " distinct mel filters");
  }
  const double nyquist = sample_rate / 2.0;
  const double f_max = cfg.f_max_hz > 0.0 ? cfg.f_max_hz : nyquist;
  if (!(cfg.f_min_hz >= 0.0 && cfg.f_min_hz < f_max && f_max <= nyquist)) {
    throw DomainError("filterbank frequency range must satisfy 0 <= f_min < f_max <= sr/2");
  }

  MelFilterbank fb;
  fb.n_fft = n_fft;
  fb.sample_rate = sample_rate;
  const double mel_lo = hz_to_mel(cfg.f_min_hz);
  const double mel_hi = hz_to_mel(f_max);
  for (std::size_t j = 0; j < cfg.n_bands + 2; ++j) {
    fb.edges_hz.push_back(mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(j) / (cfg.n_bands + 1)));
  }
  fb.weights = Tensor({cfg.n_bands, n_bins});
  for (std::size_t band = 0; band < cfg.n_bands; ++band) {
    const double lo = fb.edges_hz[band], mid = fb.edges_hz[band + 1], hi = fb.edges_hz[band + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      const double w = std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid));
      fb.weights.at(band, k) = std::max(0.0, w);
    }
  }
  return fb;
}

FeatureSequence log_mel(const Tensor& frames, std::uint32_t sample_rate, const MelConfig& cfg, double frame_rate) {
  if (frames.rank() != 2 || frames.dim(0) == 0 || frames.dim(1) == 0) {
    throw ShapeError("log_mel expects a non-empty [frames x samples] matrix, got " + frames.shape_string());
  }
  const std::size_t n_frames = frames.dim(0), W = frames.dim(1);
  const std::size_t n_fft = next_pow2(W);
  const MelFilterbank fb = make_mel_filterbank(sample_rate, n_fft, cfg);

  std::vector<double> window(W, 1.0);
  if (W > 1) {
    for (std::size_t n = 0; n < W; ++n) {
      window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(W - 1));
    }
  }

  RealFft fft(n_fft);
  std::vector<double> power;
  Tensor out({n_frames, cfg.n_bands});
  for (std::size_t f = 0; f < n_frames; ++f) {
    double* buf = fft.input();
    for (std::size_t n = 0; n < W; ++n) buf[n] = frames.at(f, n) * window[n];
    std::fill(buf + W, buf + n_fft, 0.0);
    fft.power(power);
    for (std::size_t band = 0; band < cfg.n_bands; ++band) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb.weights.at(band, k) * power[k];
      out.at(f, band) = std::log(std::max(e, cfg.energy_floor));
    }
  }
  return FeatureSequence(Modality::kAudio, frame_rate, std::move(out));
}

FeatureSequence audio_features(const Waveform& w, double win_ms, double shift_ms, const MelConfig& cfg) {
  return log_mel(frame_signal(w, win_ms, shift_ms), w.sample_rate, cfg, 1000.0 / shift_ms);
}

double signal_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db, std::uint64_t seed) {
  if (clean.sample_rate != noise.sample_rate) {
    throw DomainError("sample rate mismatch: clean " + std::to_string(clean.sample_rate) + " Hz, noise " +
                      std::to_string(noise.sample_rate) + " Hz");
  }
  if (clean.samples.empty() || noise.samples.empty()) throw DomainError("mix_at_snr: empty waveform");
  if (!std::isfinite(snr_db)) throw DomainError("mix_at_snr: SNR must be finite");

  const std::size_t n = clean.samples.size();
  const std::size_t m = noise.samples.size();
  std::vector<double> segment(n);
  if (m > n) {
    Rng rng(seed);
    const std::size_t offset = rng.below(m - n + 1);
    std::copy_n(noise.samples.begin() + static_cast<std::ptrdiff_t>(offset), n, segment.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) segment[i] = noise.samples[i % m];
  }

  const double p_clean = signal_power(clean.samples);
  const double p_noise = signal_power(segment);
  if (p_clean == 0.0) throw DomainError("mix_at_snr: clean signal has zero power");
  if (p_noise == 0.0) throw DomainError("mix_at_snr: noise has zero power");
  const double gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));

  Waveform out{clean.samples, clean.sample_rate};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] += gain * segment[i];
  return out;
}

double measured_snr(const Waveform& clean, const Waveform& noisy) {
  if (clean.samples.size() != noisy.samples.size()) throw DomainError("measured_snr: length mismatch");
  std::vector<double> residual(clean.samples.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = noisy.samples[i] - clean.samples[i];
  const double p_res = signal_power(residual);
  if (p_res == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_power(clean.samples) / p_res);
}

Waveform read_wav(std::istream& in) {
  const std::string what = "WAV";
  char hdr[44];
  io::read_bytes(in, hdr, sizeof hdr, what);
  auto u32 = [&](int off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(hdr[off])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(hdr[off + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(hdr[off + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(hdr[off + 3])) << 24;
  };
  auto u16 = [&](int off) { return u32(off) & 0xffffu; };
  if (std::string(hdr, 4) != "RIFF" || std::string(hdr + 8, 4) != "WAVE" || std::string(hdr + 12, 4) != "fmt " ||
      std::string(hdr + 36, 4) != "data") {
    throw FormatError("WAV: not a canonical 44-byte-header RIFF/WAVE file");
  }
  if (u32(16) != 16 || u16(20) != 1) throw FormatError("WAV: only uncompressed PCM is supported");
  if (u16(22) != 1) throw FormatError("WAV: expected 1 channel, got " + std::to_string(u16(22)));
  if (u16(34) != 16) throw FormatError("WAV: expected 16-bit samples, got " + std::to_string(u16(34)) + "-bit");
  const std::uint32_t rate = u32(24);
  if (rate == 0) throw FormatError("WAV: zero sample rate");
  const std::uint32_t bytes = u32(40);
  if (bytes % 2 != 0) throw FormatError("WAV: odd data chunk size");
  std::vector<char> raw(bytes);
  io::read_bytes(in, raw.data(), raw.size(), what);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(bytes / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const auto lo = static_cast<unsigned char>(raw[2 * i]);
    const auto hi = static_cast<unsigned char>(raw[2 * i + 1]);
    const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    w.samples[i] = v / 32768.0;
  }
  if (w.samples.empty()) throw FormatError("WAV: no samples");
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return read_wav(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_wav(std::ostream& out, const Waveform& w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  io::write_magic(out, "RIFF");
  io::write_u32(out, 36 + data_bytes);
  io::write_magic(out, "WAVEfmt ");
  io::write_u32(out, 16);
  io::write_u32(out, 1u | (1u << 16));  // PCM, mono
  io::write_u32(out, w.sample_rate);
  io::write_u32(out, w.sample_rate * 2);
  io::write_u32(out, 2u | (16u << 16));  // block align 2, 16 bits
  io::write_magic(out, "data");
  io::write_u32(out, data_bytes);
  for (double x : w.samples) {
    const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    const auto v = static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled));
    const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(bytes, 2);
  }
  if (!out) throw Error("WAV: write failed");
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  auto out = io::open_output(path);
  write_wav(out, w);
}

}  // namespace avf
