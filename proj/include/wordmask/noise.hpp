#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wordmask/audio.hpp"
#include "wordmask/common.hpp"

namespace wordmask {

enum class NoiseKind { kExternalFile, kSynthesized };

// Speech-shaped masker signal, either loaded from a WAV or synthesized.
struct NoiseSource {
  NoiseKind kind = NoiseKind::kSynthesized;
  Waveform waveform;
  std::uint64_t seed = 0;
};

inline NoiseSource load_masker(const std::vector<std::uint8_t>& wav_bytes) {
  NoiseSource src;
  src.kind = NoiseKind::kExternalFile;
  src.waveform = read_wav(wav_bytes);
  return src;
}

inline NoiseSource load_masker_file(const std::string& path) {
  NoiseSource src;
  src.kind = NoiseKind::kExternalFile;
  src.waveform = read_wav_file(path);
  return src;
}

namespace detail {

// First-order filter in biquad form (a2 = b2 = 0).
struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double tick(double x) {
    double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

inline Biquad lowpass1(double cutoff_hz, double rate_hz) {
  double c = std::tan(M_PI * cutoff_hz / rate_hz);
  double k = c / (1.0 + c);
  return {k, k, 0.0, (c - 1.0) / (1.0 + c), 0.0};
}

inline Biquad highpass1(double cutoff_hz, double rate_hz) {
  double c = std::tan(M_PI * cutoff_hz / rate_hz);
  double k = 1.0 / (1.0 + c);
  return {k, -k, 0.0, (c - 1.0) / (1.0 + c), 0.0};
}

}  // namespace detail

// White Gaussian noise shaped to a speech-like spectrum (-6 dB/oct above
// 500 Hz, DC blocked at 50 Hz), amplitude-modulated by a sub-8 Hz positive
// envelope, RMS normalized to 0.1 full scale. Deterministic in
// (duration, rate, seed).
inline NoiseSource synthesize_masker(double duration_s, int sample_rate_hz,
                                     std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw ContractError("duration must be positive");
  if (sample_rate_hz <= 0) throw ContractError("sample rate must be positive");

  std::size_t n = static_cast<std::size_t>(
      std::llround(duration_s * sample_rate_hz));
  if (n == 0) n = 1;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Carrier: shaped broadband noise.
  auto lp = detail::lowpass1(500.0, sample_rate_hz);
  auto hp = detail::highpass1(50.0, sample_rate_hz);
  std::vector<double> carrier(n);
  for (std::size_t i = 0; i < n; ++i)
    carrier[i] = hp.tick(lp.tick(gauss(rng)));

  // Envelope: squared 3 Hz-lowpassed noise, so modulation energy stays
  // below 8 Hz; floored to keep the masker from vanishing.
  auto env_lp1 = detail::lowpass1(3.0, sample_rate_hz);
  auto env_lp2 = detail::lowpass1(3.0, sample_rate_hz);
  std::vector<double> env(n);
  double env_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = env_lp2.tick(env_lp1.tick(gauss(rng)));
    env[i] = e * e;
    env_sum += env[i];
  }
  double env_mean = env_sum / n;
  if (env_mean <= 0.0) env_mean = 1.0;

  double sq_sum = 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = std::max(env[i] / env_mean, 0.05);
    out[i] = carrier[i] * e;
    sq_sum += out[i] * out[i];
  }
  double rms = std::sqrt(sq_sum / n);
  double gain = rms > 0.0 ? 0.1 / rms : 0.0;

  NoiseSource src;
  src.kind = NoiseKind::kSynthesized;
  src.seed = seed;
  src.waveform.sample_rate_hz = sample_rate_hz;
  src.waveform.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    src.waveform.samples[i] = static_cast<float>(out[i] * gain);
  return src;
}

// Exactly n_samples from the masker, tiled end-to-end if the masker is
// shorter. start_offset indexes into the masker (modulo its length).
inline std::vector<float> cut_segment(const NoiseSource& src,
                                      std::size_t n_samples,
                                      std::size_t start_offset = 0) {
  if (n_samples == 0) throw ContractError("n_samples must be >= 1");
  const auto& m = src.waveform.samples;
  if (m.empty()) throw ContractError("empty masker");
  std::vector<float> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    out[i] = m[(start_offset + i) % m.size()];
  return out;
}

}  // namespace wordmask
