#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "avf/features.hpp"
#include "avf/tensor.hpp"

namespace avf {

inline constexpr std::uint32_t kDefaultSampleRate = 25000;

struct Waveform {
  std::vector<double> samples;
  std::uint32_t sample_rate = kDefaultSampleRate;
};

/// Window or shift length in samples: round(ms * sr / 1000).
std::size_t samples_for_ms(double ms, std::uint32_t sample_rate);

/// Splits into windows of win_ms every shift_ms. Returns [n_frames x W] with
/// n_frames = floor((N - W) / S) + 1; the trailing remainder is dropped.
Tensor frame_signal(const Waveform& w, double win_ms = 20.0, double shift_ms = 10.0);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters equally spaced on the mel scale between f_min and f_max.
struct MelFilterbank {
  std::size_t n_fft = 0;
  std::uint32_t sample_rate = 0;
  std::vector<double> edges_hz;  // n_bands + 2 points; centers are edges_hz[1..n_bands]
  Tensor weights;                // [n_bands x (n_fft / 2 + 1)]

  std::size_t n_bands() const { return weights.dim(0); }
  double center_hz(std::size_t band) const { return edges_hz[band + 1]; }
};

struct MelConfig {
  std::size_t n_bands = kAudioBands;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;  // 0 selects sr / 2
  double energy_floor = 1e-10;
};

MelFilterbank make_mel_filterbank(std::uint32_t sample_rate, std::size_t n_fft, const MelConfig& cfg = {});

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Hamming window, zero-pad to next_pow2(W), power spectrum, mel filters,
/// natural log of max(energy, floor).
FeatureSequence log_mel(const Tensor& frames, std::uint32_t sample_rate, const MelConfig& cfg = {},
                        double frame_rate = 100.0);

/// frame_signal followed by log_mel with frame rate 1000 / shift_ms.
FeatureSequence audio_features(const Waveform& w, double win_ms = 20.0, double shift_ms = 10.0,
                               const MelConfig& cfg = {});

/// Mean of squared samples.
double signal_power(std::span<const double> x);

/// clean + g * noise, with noise tiled cyclically (shorter) or cut at a
/// seeded random offset (longer) to clean's length, and
/// g = sqrt(P_clean / (P_noise * 10^(snr_db / 10))).
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db, std::uint64_t seed = 0);

/// 10 log10(P_clean / P_(noisy - clean)); +infinity when noisy == clean.
double measured_snr(const Waveform& clean, const Waveform& noisy);

/// Canonical 44-byte-header PCM WAV, mono 16-bit. Samples are scaled by
/// 1/32768 on read; on write they are clamped and rounded.
Waveform read_wav(const std::filesystem::path& path);
Waveform read_wav(std::istream& in);
void write_wav(const std::filesystem::path& path, const Waveform& w);
void write_wav(std::ostream& out, const Waveform& w);

}  // namespace avf
