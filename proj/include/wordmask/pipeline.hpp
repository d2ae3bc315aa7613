#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordmask/alignment.hpp"
#include "wordmask/audio.hpp"
#include "wordmask/common.hpp"
#include "wordmask/io.hpp"
#include "wordmask/masker.hpp"
#include "wordmask/noise.hpp"
#include "wordmask/selection.hpp"

namespace wordmask {

enum class MaskDomain { kWave, kCodes };

inline const char* to_string(MaskDomain d) {
  return d == MaskDomain::kWave ? "wave" : "codes";
}

inline MaskDomain parse_domain(const std::string& s) {
  if (s == "wave") return MaskDomain::kWave;
  if (s == "codes") return MaskDomain::kCodes;
  throw ContractError("unknown mask domain '" + s + "'");
}

struct ExperimentConfig {
  std::string audio_dir;
  std::string textgrid_dir;
  std::string codes_dir;       // optional; required for the codes domain
  std::string output_dir;
  std::string masker_file;     // optional; synthesized masker when empty
  std::string noise_codes_file;  // optional; synthesized codes when empty

  std::vector<MaskType> types = {MaskType::kNoise, MaskType::kDelete,
                                 MaskType::kReverse};
  std::vector<MaskPosition> positions = {MaskPosition::kStart,
                                         MaskPosition::kMiddle,
                                         MaskPosition::kEnd};
  std::vector<MaskDomain> domains = {MaskDomain::kWave, MaskDomain::kCodes};

  std::size_t n_words = 1;
  std::string sil_token = kDefaultSilToken;
  std::uint64_t seed = 0;
  bool rms_match = true;
  bool random_noise_offset = false;
  SelectionCriteria criteria;
  bool apply_criteria = true;
};

// One utterance as loaded from disk.
struct CorpusUtterance {
  AlignedUtterance alignment;
  std::optional<Waveform> audio;
  std::optional<CodeSequence> codes;
};

struct GridError {
  std::string utterance_id;
  std::string cell;
  std::string message;
};

struct GridRunResult {
  std::size_t emitted = 0;
  std::vector<GridError> errors;
  std::vector<std::string> utterance_ids;  // eligible, sorted
};

namespace detail {

// VCTK-style ids: speaker is the part before the first underscore.
inline std::string speaker_from_id(const std::string& utt_id) {
  auto p = utt_id.find('_');
  return p == std::string::npos ? utt_id : utt_id.substr(0, p);
}

}  // namespace detail

// Loads every *.TextGrid in textgrid_dir, pairing audio and code files by
// stem. Missing audio/codes leave the optional empty.
inline std::map<std::string, CorpusUtterance> load_corpus(
    const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(cfg.textgrid_dir))
    throw ContractError("textgrid dir not found: " + cfg.textgrid_dir);

  std::map<std::string, CorpusUtterance> corpus;
  for (const auto& entry : fs::directory_iterator(cfg.textgrid_dir)) {
    if (entry.path().extension() != ".TextGrid") continue;
    std::string utt_id = entry.path().stem().string();
    CorpusUtterance u;
    u.alignment = parse_textgrid(read_text_file(entry.path().string()), utt_id,
                                 detail::speaker_from_id(utt_id),
                                 cfg.sil_token);
    if (!cfg.audio_dir.empty()) {
      fs::path wav = fs::path(cfg.audio_dir) / (utt_id + ".wav");
      if (fs::exists(wav)) u.audio = read_wav_file(wav.string());
    }
    if (!cfg.codes_dir.empty()) {
      fs::path cj = fs::path(cfg.codes_dir) / (utt_id + ".json");
      if (fs::exists(cj))
        u.codes = codes_from_json(nlohmann::json::parse(read_text_file(cj.string())));
    }
    corpus.emplace(utt_id, std::move(u));
  }
  return corpus;
}

inline std::vector<UtteranceStats> corpus_stats(
    const std::map<std::string, CorpusUtterance>& corpus,
    bool speech_only_duration = false) {
  std::vector<UtteranceStats> stats;
  for (const auto& [id, u] : corpus)
    stats.push_back(compute_stats(u.alignment, u.codes, speech_only_duration));
  return stats;
}

// Deterministic synthetic noise codes for the code-domain noise mask when
// no encoder output is supplied.
inline CodeSequence synthesize_noise_codes(int codebook_size, std::size_t n,
                                           double code_rate_hz,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, codebook_size - 1);
  CodeSequence c;
  c.codebook_size = codebook_size;
  c.code_rate_hz = code_rate_hz;
  c.codes.resize(n);
  for (auto& v : c.codes) v = pick(rng);
  return c;
}

inline std::string tokens_to_line(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Runs the full mask grid over the eligible corpus. For every
// (utterance, domain, type, position) it writes the masked artifact, the
// masked reference transcript, and a manifest. Outputs are emitted in
// sorted utterance order, so a fixed config + seed gives identical bytes.
inline GridRunResult run_mask_grid(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.types.empty() || cfg.positions.empty() || cfg.domains.empty())
    throw ContractError("empty mask grid");

  auto corpus = load_corpus(cfg);
  if (corpus.empty()) throw ContractError("no TextGrids found in " + cfg.textgrid_dir);

  std::vector<std::string> eligible;
  if (cfg.apply_criteria) {
    auto stats = corpus_stats(corpus);
    for (const auto& s : filter_eligible(stats, cfg.criteria))
      eligible.push_back(s.utterance_id);
  } else {
    for (const auto& [id, u] : corpus) eligible.push_back(id);
  }
  std::sort(eligible.begin(), eligible.end());
  if (eligible.empty())
    throw ContractError("no eligible utterances after selection filtering");

  bool need_wave_noise =
      std::count(cfg.domains.begin(), cfg.domains.end(), MaskDomain::kWave) &&
      std::count(cfg.types.begin(), cfg.types.end(), MaskType::kNoise);
  std::optional<NoiseSource> noise;
  if (need_wave_noise && !cfg.masker_file.empty())
    noise = load_masker_file(cfg.masker_file);

  std::optional<CodeSequence> noise_codes;
  if (!cfg.noise_codes_file.empty())
    noise_codes = codes_from_json(
        nlohmann::json::parse(read_text_file(cfg.noise_codes_file)));

  GridRunResult result;
  result.utterance_ids = eligible;
  fs::path out_root(cfg.output_dir);

  for (const auto& utt_id : eligible) {
    const CorpusUtterance& u = corpus.at(utt_id);
    std::vector<std::string> transcript;
    for (auto i : u.alignment.nonsil_indices())
      transcript.push_back(u.alignment.words[i].label);

    for (MaskDomain domain : cfg.domains) {
      for (MaskType type : cfg.types) {
        for (MaskPosition pos : cfg.positions) {
          std::string cell = std::string(to_string(domain)) + "/" +
                             to_string(type) + "/" + to_string(pos);
          try {
            MaskTarget target = select_target(u.alignment, pos, cfg.n_words);
            fs::path cell_dir = out_root / "masked" / to_string(domain) /
                                to_string(type) / to_string(pos);

            MaskManifest man;
            if (domain == MaskDomain::kWave) {
              if (!u.audio)
                throw ContractError("no audio for utterance " + utt_id);
              MaskSpec spec;
              spec.mask_type = type;
              spec.target = target;
              spec.rms_match = cfg.rms_match;
              if (type == MaskType::kNoise) {
                if (noise) {
                  spec.noise_source = *noise;
                } else {
                  // per-utterance seed keeps runs reproducible while
                  // decorrelating maskers across utterances
                  std::uint64_t s = cfg.seed ^ std::hash<std::string>{}(utt_id);
                  spec.noise_source = synthesize_masker(
                      target.span_end_s - target.span_start_s + 0.1,
                      u.audio->sample_rate_hz, s);
                }
                if (cfg.random_noise_offset) {
                  std::mt19937_64 rng(cfg.seed ^
                                      std::hash<std::string>{}(utt_id + cell));
                  spec.noise_offset = rng() %
                      spec.noise_source->waveform.samples.size();
                }
              }
              auto [masked, m] = mask_waveform(*u.audio, spec, to_string(pos));
              man = m;
              atomic_write_file(cell_dir / (utt_id + ".wav"), write_wav(masked));
            } else {
              if (!u.codes)
                throw ContractError("no code sequence for utterance " + utt_id);
              std::optional<CodeSequence> nc;
              if (type == MaskType::kNoise) {
                if (noise_codes) {
                  nc = *noise_codes;
                  nc->code_rate_hz = u.codes->code_rate_hz;
                } else {
                  nc = synthesize_noise_codes(
                      u.codes->codebook_size, 512, u.codes->code_rate_hz,
                      cfg.seed ^ 0x9e3779b97f4a7c15ull);
                }
              }
              auto [masked, m] = mask_codes(*u.codes, type, target, nc,
                                            to_string(pos));
              man = m;
              atomic_write_file(cell_dir / (utt_id + ".json"),
                                to_json(masked).dump(2) + "\n");
            }

            man.utterance_id = utt_id;
            auto ref = masked_reference(transcript, target);
            atomic_write_file(cell_dir / (utt_id + ".ref.txt"),
                              tokens_to_line(ref) + "\n");
            atomic_write_file(out_root / "manifests" /
                                  (utt_id + "." + to_string(domain) + "." +
                                   to_string(type) + "." + to_string(pos) +
                                   ".json"),
                              to_json(man).dump(2) + "\n");
            ++result.emitted;
          } catch (const std::exception& e) {
            result.errors.push_back({utt_id, cell, e.what()});
          }
        }
      }
    }
  }
  return result;
}

// TOML-like `key = value` config file; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_file(
    const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", lineno);
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    kv[key] = val;
  }
  return kv;
}

}  // namespace wordmask
