// Acceptance harness: one pass/fail line per criterion. Exits nonzero if
// any criterion fails. The end-to-end criterion drives the CLI binary named
// by WORDMASK_BIN; WAV fixtures are found via WORDMASK_FIXTURES.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wordmask/alignment.hpp"
#include "wordmask/audio.hpp"
#include "wordmask/io.hpp"
#include "wordmask/masker.hpp"
#include "wordmask/metrics.hpp"
#include "wordmask/noise.hpp"
#include "wordmask/selection.hpp"
#include "wordmask/trials.hpp"

using namespace wordmask;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(const std::string& name, const std::function<bool()>& body) {
  bool ok = false;
  std::string detail;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body();
  } catch (const std::exception& e) {
    detail = std::string(" (") + e.what() + ")";
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  [" << ms << " ms]"
            << detail << "\n";
  if (!ok) ++g_failures;
}

// --- independent oracles -------------------------------------------------

// Top-down memoized edit distance, structurally separate from the DP.
std::size_t edit_distance_oracle(const std::vector<int>& a,
                                 const std::vector<int>& b) {
  std::vector<std::vector<int>> memo(a.size() + 1,
                                     std::vector<int>(b.size() + 1, -1));
  std::function<int(std::size_t, std::size_t)> go =
      [&](std::size_t i, std::size_t j) -> int {
    if (i == 0) return static_cast<int>(j);
    if (j == 0) return static_cast<int>(i);
    int& slot = memo[i][j];
    if (slot >= 0) return slot;
    int best = go(i - 1, j - 1) + (a[i - 1] != b[j - 1] ? 1 : 0);
    best = std::min(best, go(i - 1, j) + 1);
    best = std::min(best, go(i, j - 1) + 1);
    return slot = best;
  };
  return static_cast<std::size_t>(go(a.size(), b.size()));
}

double eer_oracle(const std::vector<std::pair<double, bool>>& scores) {
  std::vector<double> vals;
  for (const auto& [s, t] : scores) vals.push_back(s);
  std::sort(vals.begin(), vals.end());
  std::vector<double> cand;
  cand.push_back(vals.front() - 1.0);
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[i - 1]) cand.push_back(0.5 * (vals[i] + vals[i - 1]));
  cand.push_back(vals.back() + 1.0);

  auto rates = [&](double t) {
    std::size_t nt = 0, nn = 0, fr = 0, fa = 0;
    for (const auto& [s, tgt] : scores) {
      if (tgt) {
        ++nt;
        if (s < t) ++fr;
      } else {
        ++nn;
        if (s >= t) ++fa;
      }
    }
    return std::make_pair(double(fa) / nn, double(fr) / nt);
  };

  for (std::size_t k = 0; k + 1 < cand.size(); ++k) {
    auto [far0, frr0] = rates(cand[k]);
    auto [far1, frr1] = rates(cand[k + 1]);
    double d0 = far0 - frr0, d1 = far1 - frr1;
    if (d0 == 0.0) return 0.5 * (far0 + frr0);
    if (d0 > 0.0 && d1 <= 0.0) {
      if (d1 == 0.0) return 0.5 * (far1 + frr1);
      double alpha = d0 / (d0 - d1);
      return frr0 + alpha * (frr1 - frr0);
    }
  }
  return 0.5;
}

std::vector<std::string> to_tokens(const std::vector<int>& symbols) {
  static const std::vector<std::string> alphabet = {"x", "y", "z"};
  std::vector<std::string> out;
  for (int s : symbols) out.push_back(alphabet[s]);
  return out;
}

// all symbol strings over {0,1,2} of the given length
void enumerate_strings(std::size_t len,
                       const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> cur(len);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == len) {
      fn(cur);
      return;
    }
    for (int s = 0; s < 3; ++s) {
      cur[i] = s;
      rec(i + 1);
    }
  };
  rec(0);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

bool run_cmd(const std::string& cmd) {
  int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return rc == 0;
}

bool dirs_byte_identical(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel_a;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a));
  std::sort(rel_a.begin(), rel_a.end());
  for (const auto& rel : rel_a) {
    if (!fs::exists(b / rel)) return false;
    if (read_binary_file((a / rel).string()) !=
        read_binary_file((b / rel).string()))
      return false;
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  return count_b == rel_a.size();
}

#include "../tests/ttest_fixtures.inc"

// --- end-to-end pipeline -------------------------------------------------

bool run_pipeline(const std::string& bin, const fs::path& work) {
  const std::vector<std::string> domains = {"wave", "codes"};
  const std::vector<std::string> types = {"noise", "delete", "reverse"};
  const std::vector<std::string> positions = {"start", "middle", "end"};

  fs::path corpus = work / "corpus";
  fs::path out = work / "out";
  if (!run_cmd(bin + " demo-corpus --out " + corpus.string() + " --seed 7"))
    return false;
  if (!run_cmd(bin + " select --textgrids " + (corpus / "textgrids").string() +
               " --codes " + (corpus / "codes").string() + " --out " +
               (out / "stats.csv").string() + " --eligible-out " +
               (out / "eligible.csv").string()))
    return false;
  if (!run_cmd(bin + " mask --audio " + (corpus / "wavs").string() +
               " --textgrids " + (corpus / "textgrids").string() +
               " --codes " + (corpus / "codes").string() + " --out " +
               out.string() + " --seed 7"))
    return false;

  for (const auto& dom : domains) {
    std::string kde_series;
    if (!run_cmd(bin + " eval-wer --transcripts " +
                 (corpus / "asr" / (dom + "_none.jsonl")).string() + " --out " +
                 (out / "eval" / dom / "none").string()))
      return false;
    if (!run_cmd(bin + " eval-asv --enroll " +
                 (corpus / "emb" / "enroll.jsonl").string() + " --test " +
                 (corpus / "emb" / (dom + "_none.jsonl")).string() + " --out " +
                 (out / "eval" / dom / "none").string()))
      return false;
    for (const auto& t : types) {
      for (const auto& p : positions) {
        std::string cell = dom + "_" + t + "_" + p;
        fs::path cell_out = out / "eval" / dom / t / p;
        if (!run_cmd(bin + " eval-wer --transcripts " +
                     (corpus / "asr" / (cell + ".jsonl")).string() +
                     " --out " + cell_out.string()))
          return false;
        if (!run_cmd(bin + " eval-asv --enroll " +
                     (corpus / "emb" / "enroll.jsonl").string() + " --test " +
                     (corpus / "emb" / (cell + ".jsonl")).string() +
                     " --out " + cell_out.string()))
          return false;
        kde_series += " " + t + "_" + p + "=" +
                      (cell_out / "per_pair.csv").string();
      }
    }
    if (!run_cmd(bin + " kde" + kde_series + " --out-svg " +
                 (out / "reports" / ("kde_" + dom + ".svg")).string() +
                 " --out-dir " + (out / "reports" / ("kde_" + dom)).string() +
                 " --title " + dom))
      return false;
  }

  if (!run_cmd(bin + " report --kind wer --cells-dir " +
               (out / "eval").string() + " --out " +
               (out / "reports" / "wer_table.csv").string() + " --cells-out " +
               (out / "reports" / "wer_cells.csv").string()))
    return false;
  if (!run_cmd(bin + " report --kind eer --cells-dir " +
               (out / "eval").string() + " --out " +
               (out / "reports" / "eer_table.csv").string()))
    return false;
  return true;
}

}  // namespace

int main() {
  std::string fixtures = env_or("WORDMASK_FIXTURES", "tests/fixtures");
  std::string bin = env_or("WORDMASK_BIN", "./wordmask");

  criterion("WER oracle equivalence (exhaustive, len <= 6, 3 symbols)", [] {
    std::vector<std::vector<int>> refs, hyps;
    for (std::size_t len = 0; len <= 6; ++len)
      enumerate_strings(len, [&](const std::vector<int>& s) {
        if (!s.empty()) refs.push_back(s);
        hyps.push_back(s);
      });
    for (const auto& r : refs) {
      auto rt = to_tokens(r);
      for (const auto& h : hyps) {
        auto res = wer(rt, to_tokens(h));
        if (res.substitutions + res.deletions + res.insertions !=
            edit_distance_oracle(r, h))
          return false;
      }
    }
    return true;
  });

  criterion("EER oracle equivalence (500 random sets + exact fixtures)", [] {
    std::mt19937_64 rng(2023);
    std::normal_distribution<double> tgt(1.0, 1.0), non(0.0, 1.0);
    for (int it = 0; it < 500; ++it) {
      std::vector<std::pair<double, bool>> scores;
      std::size_t nt = 1 + rng() % 100, nn = 1 + rng() % 100;
      for (std::size_t i = 0; i < nt; ++i) scores.push_back({tgt(rng), true});
      for (std::size_t i = 0; i < nn; ++i) scores.push_back({non(rng), false});
      if (std::fabs(eer(scores).eer - eer_oracle(scores)) > 1e-9) return false;
    }
    std::vector<std::pair<double, bool>> sep = {
        {1, true}, {1, true}, {1, true}, {0, false}, {0, false}, {0, false}};
    if (eer(sep).eer != 0.0) return false;
    std::vector<std::pair<double, bool>> chance = {
        {0.3, true}, {0.7, true}, {0.3, false}, {0.7, false}};
    return std::fabs(eer(chance).eer - 0.5) < 1e-12;
  });

  criterion("EER rank invariance under monotone transforms (100 cases)", [] {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.2, 3.0);
    for (int it = 0; it < 100; ++it) {
      std::vector<std::pair<double, bool>> scores;
      std::size_t n = 10 + rng() % 80;
      for (std::size_t i = 0; i < n; ++i)
        scores.push_back({g(rng) + (i % 2 ? 0.5 : 0.0), i % 2 == 1});
      double base = eer(scores).eer;
      double a = scale(rng);
      auto tr = scores;
      // exp(a*s) + 0.1*tanh(s) is strictly increasing for a > 0
      for (auto& [s, t] : tr) s = std::exp(a * s) + 0.1 * std::tanh(s);
      if (std::fabs(eer(tr).eer - base) > 1e-12) return false;
    }
    return true;
  });

  criterion("Mask algebra properties (1000 randomized instances)", [] {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> amp(-1.0f, 1.0f);
    for (int it = 0; it < 1000; ++it) {
      const int rate = 8000;
      std::size_t n = 64 + rng() % 4000;
      Waveform w;
      w.sample_rate_hz = rate;
      for (std::size_t i = 0; i < n; ++i) w.samples.push_back(amp(rng));
      std::size_t s0 = rng() % (n - 1);
      std::size_t s1 = s0 + 1 + rng() % (n - s0 - 1) ;
      MaskTarget target;
      target.count = 1;
      target.span_start_s = double(s0) / rate;
      target.span_end_s = double(s1) / rate;

      MaskSpec rev;
      rev.mask_type = MaskType::kReverse;
      rev.target = target;
      auto [once, man] = mask_waveform(w, rev);
      auto twice = mask_waveform(once, rev).first;
      if (twice.samples != w.samples) return false;
      if (once.samples.size() != w.samples.size()) return false;

      MaskSpec del;
      del.mask_type = MaskType::kDelete;
      del.target = target;
      auto deleted = mask_waveform(w, del).first;
      std::size_t span_len = man.span_end_sample - man.span_start_sample;
      if (deleted.samples.size() != w.samples.size() - span_len) return false;
      for (std::size_t i = 0; i < man.span_start_sample; ++i)
        if (deleted.samples[i] != w.samples[i]) return false;

      MaskSpec noise;
      noise.mask_type = MaskType::kNoise;
      noise.target = target;
      noise.noise_source = synthesize_masker(0.05, rate, rng());
      auto noised = mask_waveform(w, noise).first;
      if (noised.samples.size() != w.samples.size()) return false;
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        bool inside = i >= man.span_start_sample && i < man.span_end_sample;
        if (!inside && noised.samples[i] != w.samples[i]) return false;
      }

      // code domain
      CodeSequence c;
      c.codebook_size = 64;
      c.code_rate_hz = 250.0;
      c.codes.resize(32 + rng() % 512);
      for (auto& v : c.codes) v = static_cast<int>(rng() % 64);
      std::size_t c0 = rng() % (c.codes.size() - 1);
      std::size_t c1 = c0 + 1 + rng() % (c.codes.size() - c0 - 1);
      MaskTarget ct;
      ct.count = 1;
      ct.span_start_s = c0 / c.code_rate_hz;
      ct.span_end_s = c1 / c.code_rate_hz;

      auto conce = mask_codes(c, MaskType::kReverse, ct).first;
      if (mask_codes(conce, MaskType::kReverse, ct).first.codes != c.codes)
        return false;
      auto [cs, ce] = span_to_codes(ct.span_start_s, ct.span_end_s,
                                    c.code_rate_hz);
      auto cdel = mask_codes(c, MaskType::kDelete, ct).first;
      if (cdel.codes.size() != c.codes.size() - (ce - cs)) return false;

      CodeSequence nc;
      nc.codebook_size = 64;
      nc.codes = {static_cast<int>(rng() % 64), static_cast<int>(rng() % 64)};
      auto cnoise = mask_codes(c, MaskType::kNoise, ct, nc).first;
      if (cnoise.codes.size() != c.codes.size()) return false;
      for (std::size_t i = 0; i < c.codes.size(); ++i) {
        bool inside = i >= cs && i < ce;
        if (!inside && cnoise.codes[i] != c.codes[i]) return false;
        if (cnoise.codes[i] < 0 || cnoise.codes[i] >= 64) return false;
      }
    }
    return true;
  });

  criterion("Code-rate anchor: 1.2 s -> exactly 300 codes", [] {
    auto [s, e] = span_to_codes(0.0, 1.2, kDefaultCodeRateHz);
    return s == 0 && e == 300;
  });

  criterion("Failure filter boundary: +30 kept, +31 excluded", [] {
    TranscriptPair keep, drop;
    keep.raw_reference_chars = 100;
    keep.raw_hypothesis_chars = 130;
    drop.raw_reference_chars = 100;
    drop.raw_hypothesis_chars = 131;
    return !failure_filter(keep) && failure_filter(drop);
  });

  criterion("KDE contract: unit integral, oracle match, permutation invariance", [] {
    // unit integral on random samples
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> ln(0.0, 1.0);
    for (int it = 0; it < 20; ++it) {
      std::vector<double> v;
      for (int i = 0; i < 50; ++i) v.push_back(ln(rng));
      auto curve = kde_log_wer(v);
      double integral = 0.0;
      for (std::size_t i = 1; i < curve.grid.size(); ++i)
        integral += 0.5 * (curve.density[i] + curve.density[i - 1]) *
                    (curve.grid[i] - curve.grid[i - 1]);
      if (std::fabs(integral - 1.0) > 1e-3) return false;
    }

    // two-point oracle at 1000 grid points
    auto curve = kde_log_wer({10.0, 100.0}, 1000);
    double y0 = std::log(10.0), y1 = std::log(100.0);
    double sd = std::sqrt(0.5 * ((y0 - 0.5 * (y0 + y1)) * (y0 - 0.5 * (y0 + y1)) +
                                 (y1 - 0.5 * (y0 + y1)) * (y1 - 0.5 * (y0 + y1))) * 2.0);
    double iqr = 0.5 * (y1 - y0);
    double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(2.0, -0.2);
    std::vector<double> expect(curve.grid.size());
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      double lw = std::log(curve.grid[i]);
      double f = 0.0;
      for (double y : {y0, y1}) {
        double z = (lw - y) / h;
        f += std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * M_PI));
      }
      expect[i] = f / 2.0 / curve.grid[i];
    }
    double integral = 0.0;
    for (std::size_t i = 1; i < expect.size(); ++i)
      integral += 0.5 * (expect[i] + expect[i - 1]) *
                  (curve.grid[i] - curve.grid[i - 1]);
    for (std::size_t i = 0; i < expect.size(); ++i)
      if (std::fabs(curve.density[i] - expect[i] / integral) > 1e-6)
        return false;

    // permutation invariance
    std::vector<double> v = {0.2, 1.5, 0.7, 3.3, 0.9, 0.05};
    auto a = kde_log_wer(v);
    std::shuffle(v.begin(), v.end(), rng);
    auto b = kde_log_wer(v);
    for (std::size_t i = 0; i < a.density.size(); ++i)
      if (std::fabs(a.density[i] - b.density[i]) > 1e-9) return false;
    return true;
  });

  criterion("Paired t-test matches reference values (5 fixtures)", [] {
    for (const auto& f : ttest_fixtures()) {
      auto r = paired_t_test(f.a, f.b);
      if (std::fabs(r.t_statistic - f.t) > 1e-6) return false;
      if (std::fabs(r.p_value - f.p) > 1e-6) return false;
    }
    std::vector<double> same = {0.1, 0.4, 0.9};
    return paired_t_test(same, same).p_value == 1.0;
  });

  criterion("Trial counts: 460 target / 4096 non-target + pair identity", [] {
    // 9 speakers, utterance counts chosen so the enrollment-vs-test sweep
    // (both directions of each pair) gives the published counts
    const std::vector<std::size_t> counts = {10, 9, 8, 8, 7, 7, 7, 6, 6};
    std::vector<Embedding> embs;
    for (std::size_t spk = 0; spk < counts.size(); ++spk)
      for (std::size_t k = 0; k < counts[spk]; ++k)
        embs.push_back({"s" + std::to_string(spk) + "_" + std::to_string(k),
                        "s" + std::to_string(spk),
                        {1.0}});
    auto ordered = enumerate_trials(embs, true);
    std::size_t targets = 0;
    for (const auto& t : ordered) targets += t.is_target;
    if (targets != 460) return false;
    if (ordered.size() - targets != 4096) return false;

    std::mt19937_64 rng(6);
    for (int it = 0; it < 100; ++it) {
      std::size_t n = 2 + rng() % 50;
      std::vector<Embedding> rand_embs;
      for (std::size_t i = 0; i < n; ++i)
        rand_embs.push_back({"u" + std::to_string(i),
                             "s" + std::to_string(rng() % 6),
                             {1.0}});
      auto trials = enumerate_trials(rand_embs);
      if (trials.size() != n * (n - 1) / 2) return false;
    }
    return true;
  });

  criterion("Selection boundaries (rate 5.0 / 4.99, codes 300/301, words 6/7)", [] {
    auto stats = [](double rate, std::size_t codes, std::size_t words) {
      UtteranceStats s;
      s.speaking_rate_wps = rate;
      s.n_codes = codes;
      s.n_words_nonsil = words;
      return s;
    };
    SelectionCriteria crit;
    auto kept = [&](const UtteranceStats& s) {
      return !filter_eligible({s}, crit).empty();
    };
    return !kept(stats(5.0, 400, 7)) && kept(stats(4.99, 400, 7)) &&
           !kept(stats(3.0, 300, 7)) && kept(stats(3.0, 301, 7)) &&
           !kept(stats(3.0, 400, 6)) && kept(stats(3.0, 400, 7));
  });

  std::string bin_path = bin;
  criterion("End-to-end desk-scale run (full grid, deterministic, < 60 s)",
            [&bin_path] {
    auto t0 = std::chrono::steady_clock::now();
    fs::path work = fs::temp_directory_path() /
                    ("wordmask_accept_" + std::to_string(std::random_device{}()));
    fs::create_directories(work / "run1");
    fs::create_directories(work / "run2");
    bool ok = run_pipeline(bin_path, work / "run1") &&
              run_pipeline(bin_path, work / "run2");
    if (ok) {
      for (const char* f :
           {"reports/wer_table.csv", "reports/eer_table.csv",
            "reports/kde_wave.svg", "reports/kde_codes.svg"})
        ok = ok && fs::exists(work / "run1" / "out" / f);
      // full 3x3x2 grid present: 68 utterances x 18 cells
      std::size_t manifests = 0;
      for (const auto& e :
           fs::directory_iterator(work / "run1" / "out" / "manifests"))
        ++manifests, (void)e;
      ok = ok && manifests == 68 * 18;
      ok = ok && dirs_byte_identical(work / "run1", work / "run2");
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (ok) fs::remove_all(work);
    return ok && secs < 60.0;
  });

  criterion("WAV round-trip byte-identity on bundled fixtures", [&fixtures] {
    for (const char* name : {"tone_16k.wav", "noise_8k.wav", "edge.wav"}) {
      auto bytes = read_binary_file(fixtures + "/" + name);
      auto rewritten = write_wav(read_wav(bytes));
      // locate data chunks in both and compare
      auto chunk = [](const std::vector<std::uint8_t>& wav) {
        for (std::size_t pos = 12; pos + 8 <= wav.size();) {
          std::uint32_t len = detail::read_u32le(wav.data() + pos + 4);
          if (std::memcmp(wav.data() + pos, "data", 4) == 0)
            return std::vector<std::uint8_t>(wav.begin() + pos + 8,
                                             wav.begin() + pos + 8 + len);
          pos += 8 + len + (len & 1);
        }
        return std::vector<std::uint8_t>{};
      };
      if (chunk(bytes) != chunk(rewritten)) return false;
    }
    return true;
  });

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) + " CRITERIA FAILED")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}
