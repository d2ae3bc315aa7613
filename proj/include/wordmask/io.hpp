#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordmask/alignment.hpp"
#include "wordmask/common.hpp"
#include "wordmask/metrics.hpp"
#include "wordmask/trials.hpp"

namespace wordmask {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

// Write-temp-then-rename so readers never observe partial files.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& data) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  }
  std::filesystem::rename(tmp, path);
}

inline void atomic_write_file(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& data) {
  atomic_write_file(path,
                    std::string(reinterpret_cast<const char*>(data.data()),
                                data.size()));
}

// Transcript JSONL: one {"utterance_id", "reference", "hypothesis"} per line.
inline std::vector<TranscriptPair> read_transcripts_jsonl(
    const std::string& text, bool normalize = true) {
  std::vector<TranscriptPair> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad JSONL record: ") + e.what(), lineno);
    }
    TranscriptPair p;
    p.utterance_id = j.at("utterance_id").get<std::string>();
    std::string ref = j.at("reference").get<std::string>();
    std::string hyp = j.at("hypothesis").get<std::string>();
    p.raw_reference_chars = ref.size();
    p.raw_hypothesis_chars = hyp.size();
    p.reference = normalize_tokens(ref, normalize);
    p.hypothesis = normalize_tokens(hyp, normalize);
    out.push_back(std::move(p));
  }
  return out;
}

// Embedding JSONL: {"utterance_id", "speaker_id", "vector": [...]}.
inline std::vector<Embedding> read_embeddings_jsonl(const std::string& text) {
  std::vector<Embedding> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad JSONL record: ") + e.what(), lineno);
    }
    Embedding e;
    e.utterance_id = j.at("utterance_id").get<std::string>();
    e.speaker_id = j.at("speaker_id").get<std::string>();
    e.vector = j.at("vector").get<std::vector<double>>();
    out.push_back(std::move(e));
  }
  return out;
}

inline std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace wordmask
