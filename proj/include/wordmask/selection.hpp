#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wordmask/alignment.hpp"
#include "wordmask/common.hpp"
#include "wordmask/masker.hpp"

namespace wordmask {

struct UtteranceStats {
  std::string utterance_id;
  std::string speaker_id;
  std::size_t n_words_nonsil = 0;
  double duration_s = 0.0;
  double speaking_rate_wps = 0.0;
  std::size_t n_codes = 0;
  bool has_codes = false;
};

// When speech_only_duration is set, the rate denominator runs from the
// first word start to the last word end instead of the full audio length.
inline UtteranceStats compute_stats(const AlignedUtterance& utt,
                                    const std::optional<CodeSequence>& codes =
                                        std::nullopt,
                                    bool speech_only_duration = false) {
  if (utt.words.empty()) throw ContractError("utterance has no intervals");

  UtteranceStats s;
  s.utterance_id = utt.utterance_id;
  s.speaker_id = utt.speaker_id;
  for (const auto& w : utt.words)
    if (!w.is_sil) ++s.n_words_nonsil;

  s.duration_s = utt.total_duration_s;
  if (speech_only_duration) {
    double first = -1.0, last = 0.0;
    for (const auto& w : utt.words) {
      if (w.is_sil) continue;
      if (first < 0.0) first = w.start_s;
      last = w.end_s;
    }
    if (first >= 0.0) s.duration_s = last - first;
  }
  if (!(s.duration_s > 0.0)) throw ContractError("zero utterance duration");
  s.speaking_rate_wps = s.n_words_nonsil / s.duration_s;

  if (codes) {
    s.n_codes = codes->codes.size();
    s.has_codes = true;
  }
  return s;
}

// Eligibility thresholds. Comparison senses: rate strict <, codes strict >,
// words >=. A disabled criterion (nullopt) always passes.
struct SelectionCriteria {
  std::optional<double> max_rate_wps = 5.0;
  std::optional<std::size_t> min_codes_exclusive = 300;
  std::optional<std::size_t> min_words = 7;
  bool use_speaker_average_rate = false;
};

inline std::map<std::string, double> speaker_average_rates(
    const std::vector<UtteranceStats>& stats) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& s : stats) {
    acc[s.speaker_id].first += s.speaking_rate_wps;
    acc[s.speaker_id].second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [spk, p] : acc) out[spk] = p.first / p.second;
  return out;
}

inline std::vector<UtteranceStats> filter_eligible(
    const std::vector<UtteranceStats>& stats,
    const SelectionCriteria& criteria = {}) {
  std::map<std::string, double> spk_rate;
  if (criteria.use_speaker_average_rate)
    spk_rate = speaker_average_rates(stats);

  std::vector<UtteranceStats> out;
  for (const auto& s : stats) {
    double rate = criteria.use_speaker_average_rate
                      ? spk_rate.at(s.speaker_id)
                      : s.speaking_rate_wps;
    if (criteria.max_rate_wps && !(rate < *criteria.max_rate_wps)) continue;
    if (criteria.min_codes_exclusive &&
        !(s.n_codes > *criteria.min_codes_exclusive))
      continue;
    if (criteria.min_words && !(s.n_words_nonsil >= *criteria.min_words))
      continue;
    out.push_back(s);
  }
  return out;
}

inline std::string stats_csv_header() {
  return "utterance_id,speaker_id,n_words,duration_s,rate_wps,n_codes";
}

inline std::string stats_csv_row(const UtteranceStats& s) {
  char buf[64];
  std::string row = s.utterance_id + "," + s.speaker_id + "," +
                    std::to_string(s.n_words_nonsil) + ",";
  std::snprintf(buf, sizeof buf, "%.6f", s.duration_s);
  row += buf;
  row += ",";
  std::snprintf(buf, sizeof buf, "%.6f", s.speaking_rate_wps);
  row += buf;
  row += ",";
  row += std::to_string(s.n_codes);
  return row;
}

}  // namespace wordmask
