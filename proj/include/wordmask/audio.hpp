#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wordmask/common.hpp"

namespace wordmask {

// Mono PCM buffer, samples in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate_hz = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Half-open sample index range [start_idx, end_idx).
struct SampleSpan {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;

  std::size_t length() const { return end_idx - start_idx; }
};

namespace detail {

inline std::uint32_t read_u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline std::uint16_t read_u16le(const std::uint8_t* p) {
  return std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8;
}

inline void push_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

inline void push_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace detail

// 16-bit signed PCM mono only. Samples scaled by 1/32768.
inline Waveform read_wav(const std::vector<std::uint8_t>& bytes) {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    std::uint32_t chunk_len = read_u32le(hdr + 4);
    if (pos + 8 + chunk_len > bytes.size()) {
      throw FormatError("truncated chunk '" +
                        std::string(reinterpret_cast<const char*>(hdr), 4) +
                        "'");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw FormatError("fmt chunk too short");
      const std::uint8_t* f = hdr + 8;
      audio_format = read_u16le(f);
      channels = read_u16le(f + 2);
      sample_rate = read_u32le(f + 4);
      bits = read_u16le(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = hdr + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (data == nullptr) throw FormatError("missing data chunk");
  if (audio_format != 1) throw FormatError("non-PCM codec (format tag " +
                                           std::to_string(audio_format) + ")");
  if (channels != 1) throw FormatError("expected mono, got " +
                                       std::to_string(channels) + " channels");
  if (bits != 16) throw FormatError("expected 16-bit samples, got " +
                                    std::to_string(bits));
  if (sample_rate == 0) throw FormatError("zero sample rate");
  if (data_len % 2 != 0) throw FormatError("odd data chunk length");

  Waveform w;
  w.sample_rate_hz = static_cast<int>(sample_rate);
  w.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    std::int16_t s = static_cast<std::int16_t>(read_u16le(data + 2 * i));
    w.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return w;
}

// Clamps to [-1, 1 - 2^-15], quantizes round-half-away-from-zero.
inline std::vector<std::uint8_t> write_wav(const Waveform& w) {
  using namespace detail;
  if (w.sample_rate_hz <= 0) throw ContractError("sample rate must be positive");

  std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_len);

  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  push_u32le(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  push_u32le(out, 16);
  push_u16le(out, 1);  // PCM
  push_u16le(out, 1);  // mono
  push_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  push_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  push_u16le(out, 2);   // block align
  push_u16le(out, 16);  // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  push_u32le(out, data_len);

  const float hi = 1.0f - 1.0f / 32768.0f;
  for (float v : w.samples) {
    float c = std::clamp(v, -1.0f, hi);
    long q = std::lround(static_cast<double>(c) * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    push_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

inline Waveform read_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

// Nearest-sample rounding of second-valued boundaries, clamped to the buffer.
inline SampleSpan span_from_seconds(const Waveform& w, double start_s,
                                    double end_s) {
  if (!(start_s >= 0.0) || !(end_s > start_s)) {
    throw ContractError("invalid span [" + std::to_string(start_s) + ", " +
                        std::to_string(end_s) + ")");
  }
  if (end_s > w.duration_s() + 0.5 / w.sample_rate_hz) {
    throw ContractError("span end " + std::to_string(end_s) +
                        "s past waveform end " +
                        std::to_string(w.duration_s()) + "s");
  }
  auto idx = [&](double t) {
    long long i = std::llround(t * w.sample_rate_hz);
    return static_cast<std::size_t>(
        std::clamp<long long>(i, 0, static_cast<long long>(w.samples.size())));
  };
  SampleSpan s{idx(start_s), idx(end_s)};
  if (s.end_idx <= s.start_idx) s.end_idx = s.start_idx + 1;  // keep non-empty
  if (s.end_idx > w.samples.size()) {
    s.end_idx = w.samples.size();
    s.start_idx = s.end_idx - 1;
  }
  return s;
}

}  // namespace wordmask
