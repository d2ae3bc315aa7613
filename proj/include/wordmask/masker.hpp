#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wordmask/alignment.hpp"
#include "wordmask/audio.hpp"
#include "wordmask/common.hpp"
#include "wordmask/noise.hpp"

namespace wordmask {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr double kDefaultCodeRateHz = 250.0;

enum class MaskType { kNoise, kDelete, kReverse };

inline const char* to_string(MaskType t) {
  switch (t) {
    case MaskType::kNoise: return "noise";
    case MaskType::kDelete: return "delete";
    case MaskType::kReverse: return "reverse";
  }
  return "?";
}

inline MaskType parse_mask_type(const std::string& s) {
  if (s == "noise") return MaskType::kNoise;
  if (s == "delete") return MaskType::kDelete;
  if (s == "reverse") return MaskType::kReverse;
  throw ContractError("unknown mask type '" + s + "'");
}

// Discrete VQ phone codes at a fixed code rate.
struct CodeSequence {
  std::vector<int> codes;
  int codebook_size = 0;
  double code_rate_hz = kDefaultCodeRateHz;

  void validate() const {
    if (codebook_size <= 0) throw ContractError("codebook_size must be positive");
    if (!(code_rate_hz > 0.0)) throw ContractError("code_rate_hz must be positive");
    for (int c : codes)
      if (c < 0 || c >= codebook_size)
        throw ContractError("code " + std::to_string(c) +
                            " outside [0, " + std::to_string(codebook_size) + ")");
  }
};

inline nlohmann::json to_json(const CodeSequence& c) {
  return {{"codebook_size", c.codebook_size},
          {"code_rate_hz", c.code_rate_hz},
          {"codes", c.codes}};
}

inline CodeSequence codes_from_json(const nlohmann::json& j) {
  CodeSequence c;
  c.codebook_size = j.at("codebook_size").get<int>();
  c.code_rate_hz = j.at("code_rate_hz").get<double>();
  c.codes = j.at("codes").get<std::vector<int>>();
  c.validate();
  return c;
}

struct MaskSpec {
  MaskType mask_type = MaskType::kNoise;
  MaskTarget target;
  std::optional<NoiseSource> noise_source;  // required iff mask_type == noise
  bool rms_match = true;           // match noise level to the replaced segment
  std::size_t noise_offset = 0;    // start offset into the masker
};

// Audit record emitted beside every masked artifact.
struct MaskManifest {
  std::string utterance_id;
  std::string mask_type;
  std::string position;  // "start"/"middle"/"end" or "explicit"
  double span_start_s = 0.0;
  double span_end_s = 0.0;
  std::size_t span_start_sample = 0;
  std::size_t span_end_sample = 0;
  std::size_t span_start_code = 0;
  std::size_t span_end_code = 0;
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;
};

inline nlohmann::json to_json(const MaskManifest& m) {
  nlohmann::json j{{"utterance_id", m.utterance_id},
                   {"mask_type", m.mask_type},
                   {"position", m.position},
                   {"span_start_s", detail::round6(m.span_start_s)},
                   {"span_end_s", detail::round6(m.span_end_s)},
                   {"span_start_sample", m.span_start_sample},
                   {"span_end_sample", m.span_end_sample},
                   {"span_start_code", m.span_start_code},
                   {"span_end_code", m.span_end_code},
                   {"tool_version", m.tool_version}};
  if (m.seed) j["seed"] = *m.seed;
  return j;
}

// Maps a time span to a half-open code index range at the given code rate.
// Degenerate spans are widened to a single code.
inline std::pair<std::size_t, std::size_t> span_to_codes(double start_s,
                                                         double end_s,
                                                         double code_rate_hz) {
  if (!(start_s >= 0.0) || end_s < start_s)
    throw ContractError("ill-ordered code span");
  auto start = static_cast<std::size_t>(std::llround(start_s * code_rate_hz));
  auto end = static_cast<std::size_t>(std::llround(end_s * code_rate_hz));
  if (end <= start) end = start + 1;
  return {start, end};
}

namespace detail {

inline double rms_of(const float* p, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += double(p[i]) * p[i];
  return n ? std::sqrt(s / n) : 0.0;
}

}  // namespace detail

// Applies the mask in the waveform domain. Noise and reversal preserve
// length; deletion shortens by the span length. Samples outside the span
// are never touched.
inline std::pair<Waveform, MaskManifest> mask_waveform(const Waveform& w,
                                                       const MaskSpec& spec,
                                                       const std::string& position_label = "explicit") {
  if (spec.mask_type == MaskType::kNoise && !spec.noise_source)
    throw ContractError("noise mask requires a noise source");
  if (spec.mask_type != MaskType::kNoise && spec.noise_source)
    throw ContractError("non-noise mask must not carry a noise source");

  SampleSpan span = span_from_seconds(w, spec.target.span_start_s,
                                      spec.target.span_end_s);

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;

  switch (spec.mask_type) {
    case MaskType::kNoise: {
      out.samples = w.samples;
      auto seg = cut_segment(*spec.noise_source, span.length(), spec.noise_offset);
      if (spec.rms_match) {
        double speech_rms = detail::rms_of(w.samples.data() + span.start_idx,
                                           span.length());
        double noise_rms = detail::rms_of(seg.data(), seg.size());
        if (speech_rms > 0.0 && noise_rms > 0.0) {
          float g = static_cast<float>(speech_rms / noise_rms);
          for (auto& v : seg) v = std::clamp(v * g, -1.0f, 1.0f);
        }
      }
      std::copy(seg.begin(), seg.end(), out.samples.begin() + span.start_idx);
      break;
    }
    case MaskType::kDelete:
      out.samples.reserve(w.samples.size() - span.length());
      out.samples.insert(out.samples.end(), w.samples.begin(),
                         w.samples.begin() + span.start_idx);
      out.samples.insert(out.samples.end(), w.samples.begin() + span.end_idx,
                         w.samples.end());
      break;
    case MaskType::kReverse:
      out.samples = w.samples;
      std::reverse(out.samples.begin() + span.start_idx,
                   out.samples.begin() + span.end_idx);
      break;
  }

  MaskManifest man;
  man.mask_type = to_string(spec.mask_type);
  man.position = position_label;
  man.span_start_s = spec.target.span_start_s;
  man.span_end_s = spec.target.span_end_s;
  man.span_start_sample = span.start_idx;
  man.span_end_sample = span.end_idx;
  auto [cs, ce] = span_to_codes(spec.target.span_start_s,
                                spec.target.span_end_s, kDefaultCodeRateHz);
  man.span_start_code = cs;
  man.span_end_code = ce;
  if (spec.noise_source && spec.noise_source->kind == NoiseKind::kSynthesized)
    man.seed = spec.noise_source->seed;
  return {std::move(out), std::move(man)};
}

// Applies the mask in the VQ code domain. noise_codes are tiled or
// truncated to the span length.
inline std::pair<CodeSequence, MaskManifest> mask_codes(
    const CodeSequence& c, MaskType mask_type, const MaskTarget& target,
    const std::optional<CodeSequence>& noise_codes = std::nullopt,
    const std::string& position_label = "explicit") {
  if (mask_type == MaskType::kNoise) {
    if (!noise_codes) throw ContractError("noise mask requires noise codes");
    if (noise_codes->codebook_size != c.codebook_size)
      throw ContractError("codebook_size mismatch: " +
                          std::to_string(c.codebook_size) + " vs " +
                          std::to_string(noise_codes->codebook_size));
    if (noise_codes->codes.empty())
      throw ContractError("empty noise code sequence");
  }

  auto [start, end] = span_to_codes(target.span_start_s, target.span_end_s,
                                    c.code_rate_hz);
  if (end > c.codes.size())
    throw ContractError("code span [" + std::to_string(start) + ", " +
                        std::to_string(end) + ") out of range for " +
                        std::to_string(c.codes.size()) + " codes");

  CodeSequence out;
  out.codebook_size = c.codebook_size;
  out.code_rate_hz = c.code_rate_hz;

  switch (mask_type) {
    case MaskType::kNoise: {
      out.codes = c.codes;
      const auto& nc = noise_codes->codes;
      for (std::size_t i = 0; i < end - start; ++i)
        out.codes[start + i] = nc[i % nc.size()];
      break;
    }
    case MaskType::kDelete:
      out.codes.reserve(c.codes.size() - (end - start));
      out.codes.insert(out.codes.end(), c.codes.begin(), c.codes.begin() + start);
      out.codes.insert(out.codes.end(), c.codes.begin() + end, c.codes.end());
      break;
    case MaskType::kReverse:
      out.codes = c.codes;
      std::reverse(out.codes.begin() + start, out.codes.begin() + end);
      break;
  }

  MaskManifest man;
  man.mask_type = to_string(mask_type);
  man.position = position_label;
  man.span_start_s = target.span_start_s;
  man.span_end_s = target.span_end_s;
  man.span_start_code = start;
  man.span_end_code = end;
  return {std::move(out), std::move(man)};
}

}  // namespace wordmask
