#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordmask/common.hpp"

namespace wordmask {

inline constexpr const char* kDefaultSilToken = "SIL";

struct WordInterval {
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;
  bool is_sil = false;
};

struct AlignedUtterance {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<WordInterval> words;
  double total_duration_s = 0.0;

  // Indices into words for the non-SIL intervals, in temporal order.
  std::vector<std::size_t> nonsil_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < words.size(); ++i)
      if (!words[i].is_sil) out.push_back(i);
    return out;
  }
};

enum class MaskPosition { kStart, kMiddle, kEnd };

inline const char* to_string(MaskPosition p) {
  switch (p) {
    case MaskPosition::kStart: return "start";
    case MaskPosition::kMiddle: return "middle";
    case MaskPosition::kEnd: return "end";
  }
  return "?";
}

inline MaskPosition parse_position(const std::string& s) {
  if (s == "start") return MaskPosition::kStart;
  if (s == "middle") return MaskPosition::kMiddle;
  if (s == "end") return MaskPosition::kEnd;
  throw ContractError("unknown mask position '" + s + "'");
}

// Contiguous range [first, first + count) into the non-SIL word list,
// plus the time span of the targeted intervals.
struct MaskTarget {
  std::size_t first = 0;
  std::size_t count = 0;
  double span_start_s = 0.0;
  double span_end_s = 0.0;
};

namespace detail {

struct TgLine {
  std::string text;
  int number;  // 1-based
};

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Matches `key = value`, tolerating TextGrid index suffixes like `xmin [3]`.
inline std::optional<std::string> tg_value(const std::string& line,
                                           const std::string& key) {
  std::string t = trim(line);
  if (t.rfind(key, 0) != 0) return std::nullopt;
  std::size_t p = key.size();
  while (p < t.size() && (t[p] == ' ' || t[p] == '\t')) ++p;
  if (p >= t.size() || t[p] != '=') return std::nullopt;
  return trim(t.substr(p + 1));
}

inline double tg_number(const std::string& value, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used == 0) throw std::invalid_argument("empty");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + value + "'", line);
  }
}

inline std::string tg_unquote(const std::string& value) {
  std::string v = value;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    v = v.substr(1, v.size() - 2);
  // Praat escapes embedded quotes by doubling.
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += v[i];
    if (v[i] == '"' && i + 1 < v.size() && v[i + 1] == '"') ++i;
  }
  return out;
}

inline bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace detail

// Parses a long-format Praat TextGrid and returns the word tier.
// The tier named "words" is preferred; otherwise the first interval tier is
// used. Intervals with empty text are treated as silence.
inline AlignedUtterance parse_textgrid(const std::string& text,
                                       const std::string& utterance_id = "",
                                       const std::string& speaker_id = "",
                                       const std::string& sil_token = kDefaultSilToken) {
  using namespace detail;

  std::vector<TgLine> lines;
  {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) lines.push_back({line, ++n});
  }
  if (lines.empty()) throw StructureError("empty TextGrid");

  struct Tier {
    std::string name;
    std::vector<WordInterval> intervals;
  };
  std::vector<Tier> tiers;

  double file_xmax = 0.0;
  bool in_tier = false;       // inside an IntervalTier item
  bool pending_class = false; // saw a class line, tier starts on next fields
  std::string pending_name;
  std::optional<double> cur_xmin, cur_xmax;
  std::optional<std::string> cur_text;
  bool seen_item = false;

  auto flush_interval = [&](int line) {
    if (!cur_xmin && !cur_xmax && !cur_text) return;
    if (!cur_xmin || !cur_xmax || !cur_text)
      throw ParseError("incomplete interval record", line);
    WordInterval w;
    w.start_s = *cur_xmin;
    w.end_s = *cur_xmax;
    w.label = *cur_text;
    if (w.label.empty()) w.label = sil_token;
    w.is_sil = (w.label == sil_token);
    if (!(w.end_s > w.start_s))
      throw ParseError("interval has non-positive duration", line);
    tiers.back().intervals.push_back(w);
    cur_xmin.reset();
    cur_xmax.reset();
    cur_text.reset();
  };

  for (const auto& [raw, lineno] : lines) {
    std::string t = trim(raw);
    if (t.empty()) continue;

    if (auto v = tg_value(t, "class")) {
      if (in_tier) flush_interval(lineno);
      std::string cls = tg_unquote(*v);
      in_tier = (cls == "IntervalTier");
      pending_class = in_tier;
      if (in_tier) tiers.push_back({});
      continue;
    }
    if (t.rfind("item", 0) == 0) {
      seen_item = true;
      continue;
    }
    if (!in_tier) {
      if (auto v = tg_value(t, "xmax"); v && !seen_item)
        file_xmax = tg_number(*v, lineno);
      continue;
    }
    if (auto v = tg_value(t, "name")) {
      tiers.back().name = tg_unquote(*v);
      continue;
    }
    if (t.rfind("intervals", 0) == 0 && t.find('=') == std::string::npos) {
      flush_interval(lineno);  // `intervals [k]:` opens the next record
      continue;
    }
    if (auto v = tg_value(t, "intervals: size")) {
      (void)tg_number(*v, lineno);
      continue;
    }
    if (auto v = tg_value(t, "text")) {
      cur_text = tg_unquote(*v);
      continue;
    }
    if (auto v = tg_value(t, "xmin")) {
      if (cur_xmin) throw ParseError("duplicate xmin in interval", lineno);
      // The tier's own xmin arrives before any `intervals [k]:` header and
      // before a text field; distinguish by whether a record is open.
      if (!cur_xmax && !cur_text && tiers.back().intervals.empty() &&
          !cur_xmin && pending_class) {
        // tier header xmin
        pending_class = false;
        continue;
      }
      cur_xmin = tg_number(*v, lineno);
      continue;
    }
    if (auto v = tg_value(t, "xmax")) {
      if (pending_class || (!cur_xmin && !cur_text)) {
        // tier header xmax
        double x = tg_number(*v, lineno);
        file_xmax = std::max(file_xmax, x);
        pending_class = false;
        continue;
      }
      cur_xmax = tg_number(*v, lineno);
      continue;
    }
  }
  if (in_tier) flush_interval(static_cast<int>(lines.size()));

  const Tier* word_tier = nullptr;
  for (const auto& tier : tiers)
    if (detail::iequals(tier.name, "words")) { word_tier = &tier; break; }
  if (!word_tier && !tiers.empty()) word_tier = &tiers.front();
  if (!word_tier) throw StructureError("no interval tier found");
  if (word_tier->intervals.empty())
    throw StructureError("word tier '" + word_tier->name + "' has no intervals");

  AlignedUtterance utt;
  utt.utterance_id = utterance_id;
  utt.speaker_id = speaker_id;
  utt.words = word_tier->intervals;

  std::stable_sort(utt.words.begin(), utt.words.end(),
                   [](const WordInterval& a, const WordInterval& b) {
                     return a.start_s < b.start_s;
                   });
  for (std::size_t i = 1; i < utt.words.size(); ++i) {
    if (utt.words[i].start_s < utt.words[i - 1].end_s - 1e-3)
      throw StructureError("overlapping intervals around " +
                           std::to_string(utt.words[i].start_s) + "s");
  }
  utt.total_duration_s = std::max(file_xmax, utt.words.back().end_s);
  return utt;
}

// Emits a long-format TextGrid with a single "words" tier.
inline std::string serialize_textgrid(const AlignedUtterance& utt) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "File type = \"ooTextFile\"\n"
      << "Object class = \"TextGrid\"\n\n"
      << "xmin = 0\n"
      << "xmax = " << utt.total_duration_s << "\n"
      << "tiers? <exists>\n"
      << "size = 1\n"
      << "item []:\n"
      << "    item [1]:\n"
      << "        class = \"IntervalTier\"\n"
      << "        name = \"words\"\n"
      << "        xmin = 0\n"
      << "        xmax = " << utt.total_duration_s << "\n"
      << "        intervals: size = " << utt.words.size() << "\n";
  for (std::size_t i = 0; i < utt.words.size(); ++i) {
    const auto& w = utt.words[i];
    out << "        intervals [" << (i + 1) << "]:\n"
        << "            xmin = " << w.start_s << "\n"
        << "            xmax = " << w.end_s << "\n"
        << "            text = \"" << w.label << "\"\n";
  }
  return out.str();
}

namespace detail {
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }
}  // namespace detail

inline nlohmann::json to_json(const AlignedUtterance& utt) {
  nlohmann::json j;
  j["utterance_id"] = utt.utterance_id;
  j["speaker_id"] = utt.speaker_id;
  j["total_duration_s"] = detail::round6(utt.total_duration_s);
  auto& arr = j["intervals"] = nlohmann::json::array();
  for (const auto& w : utt.words) {
    arr.push_back({{"label", w.label},
                   {"start_s", detail::round6(w.start_s)},
                   {"end_s", detail::round6(w.end_s)},
                   {"is_sil", w.is_sil}});
  }
  return j;
}

inline AlignedUtterance utterance_from_json(const nlohmann::json& j) {
  AlignedUtterance utt;
  utt.utterance_id = j.at("utterance_id").get<std::string>();
  utt.speaker_id = j.at("speaker_id").get<std::string>();
  utt.total_duration_s = j.at("total_duration_s").get<double>();
  for (const auto& e : j.at("intervals")) {
    utt.words.push_back({e.at("label").get<std::string>(),
                         e.at("start_s").get<double>(),
                         e.at("end_s").get<double>(),
                         e.at("is_sil").get<bool>()});
  }
  return utt;
}

inline nlohmann::json to_json(const MaskTarget& t) {
  return {{"first", t.first},
          {"count", t.count},
          {"span_start_s", detail::round6(t.span_start_s)},
          {"span_end_s", detail::round6(t.span_end_s)}};
}

// Picks the run of n_words non-SIL words at the requested position.
// middle centers the run on index floor((k-1)/2) of the k non-SIL words.
inline MaskTarget select_target(const AlignedUtterance& utt,
                                MaskPosition position,
                                std::size_t n_words = 1) {
  if (n_words < 1) throw ContractError("n_words must be >= 1");
  auto nonsil = utt.nonsil_indices();
  std::size_t k = nonsil.size();
  if (k < n_words) {
    throw ContractError("utterance '" + utt.utterance_id + "' has " +
                        std::to_string(k) + " non-SIL words, need " +
                        std::to_string(n_words));
  }

  std::size_t first = 0;
  switch (position) {
    case MaskPosition::kStart:
      first = 0;
      break;
    case MaskPosition::kEnd:
      first = k - n_words;
      break;
    case MaskPosition::kMiddle: {
      std::size_t center = (k - 1) / 2;
      std::size_t lo = center >= (n_words - 1) / 2 ? center - (n_words - 1) / 2 : 0;
      first = std::min(lo, k - n_words);
      break;
    }
  }

  MaskTarget t;
  t.first = first;
  t.count = n_words;
  t.span_start_s = utt.words[nonsil[first]].start_s;
  t.span_end_s = utt.words[nonsil[first + n_words - 1]].end_s;
  return t;
}

// Removes the targeted tokens from a transcript aligned 1:1 with the
// non-SIL words.
inline std::vector<std::string> masked_reference(
    const std::vector<std::string>& transcript, const MaskTarget& target) {
  if (target.first + target.count > transcript.size())
    throw ContractError("mask target range [" + std::to_string(target.first) +
                        ", " + std::to_string(target.first + target.count) +
                        ") out of range for " +
                        std::to_string(transcript.size()) + " tokens");
  std::vector<std::string> out;
  out.reserve(transcript.size() - target.count);
  for (std::size_t i = 0; i < transcript.size(); ++i)
    if (i < target.first || i >= target.first + target.count)
      out.push_back(transcript[i]);
  return out;
}

}  // namespace wordmask
