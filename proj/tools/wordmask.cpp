// wordmask: mask words in speech (waveform or VQ code domain) and evaluate
// the impact with WER/EER protocols. Subcommands read and write files so
// external neural stages (re-synthesis, ASR, embedding extraction) can slot
// between them.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wordmask/alignment.hpp"
#include "wordmask/audio.hpp"
#include "wordmask/io.hpp"
#include "wordmask/masker.hpp"
#include "wordmask/metrics.hpp"
#include "wordmask/noise.hpp"
#include "wordmask/pipeline.hpp"
#include "wordmask/report.hpp"
#include "wordmask/selection.hpp"
#include "wordmask/svg.hpp"
#include "wordmask/trials.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wordmask;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = wordmask::detail::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// select

int cmd_select(const std::string& textgrid_dir, const std::string& codes_dir,
               double max_rate, long min_codes, long min_words,
               bool speaker_average, bool speech_only, bool no_code_criterion,
               const std::string& out_csv, const std::string& eligible_out) {
  ExperimentConfig cfg;
  cfg.textgrid_dir = textgrid_dir;
  cfg.codes_dir = codes_dir;
  auto corpus = load_corpus(cfg);
  auto stats = corpus_stats(corpus, speech_only);

  std::string csv = stats_csv_header() + "\n";
  for (const auto& s : stats) csv += stats_csv_row(s) + "\n";
  if (out_csv.empty())
    std::cout << csv;
  else
    atomic_write_file(out_csv, csv);

  SelectionCriteria crit;
  crit.max_rate_wps = max_rate;
  if (no_code_criterion || codes_dir.empty())
    crit.min_codes_exclusive.reset();
  else
    crit.min_codes_exclusive = static_cast<std::size_t>(min_codes);
  crit.min_words = static_cast<std::size_t>(min_words);
  crit.use_speaker_average_rate = speaker_average;

  auto kept = filter_eligible(stats, crit);
  std::string elig = stats_csv_header() + "\n";
  for (const auto& s : kept) elig += stats_csv_row(s) + "\n";
  if (!eligible_out.empty()) atomic_write_file(eligible_out, elig);

  std::cerr << "select: " << kept.size() << "/" << stats.size()
            << " utterances eligible\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mask

int cmd_mask(ExperimentConfig cfg) {
  auto result = run_mask_grid(cfg);
  for (const auto& e : result.errors)
    std::cerr << "mask: " << e.utterance_id << " [" << e.cell
              << "]: " << e.message << "\n";
  std::cerr << "mask: emitted " << result.emitted << " artifacts over "
            << result.utterance_ids.size() << " utterances ("
            << result.errors.size() << " failures)\n";
  if (result.emitted == 0) return kExitPartial;
  return result.errors.empty() ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// eval-wer

std::string per_pair_csv_header() {
  return "utterance_id,n_ref,sub,del,ins,wer,filtered";
}

int cmd_eval_wer(const std::string& transcripts_path,
                 const std::string& out_dir, bool no_normalize,
                 long max_excess, const std::string& paired_with,
                 const std::string& ttest_out) {
  auto pairs =
      read_transcripts_jsonl(read_text_file(transcripts_path), !no_normalize);
  std::string csv = per_pair_csv_header() + "\n";
  std::map<std::string, double> by_id;
  double sum = 0.0;
  std::size_t n = 0, excluded = 0;
  for (const auto& p : pairs) {
    bool filtered = failure_filter(p, static_cast<std::size_t>(max_excess));
    WerResult r = wer(p);
    csv += p.utterance_id + "," + std::to_string(r.n_ref) + "," +
           std::to_string(r.substitutions) + "," +
           std::to_string(r.deletions) + "," + std::to_string(r.insertions) +
           "," + format_double(r.wer, 6) + "," + (filtered ? "1" : "0") + "\n";
    if (filtered) {
      ++excluded;
    } else {
      sum += r.wer;
      ++n;
      by_id[p.utterance_id] = r.wer;
    }
  }
  fs::path out(out_dir);
  atomic_write_file(out / "per_pair.csv", csv);
  json summary{{"n_scored", n},
               {"n_excluded", excluded},
               {"mean_wer", n ? sum / n : 0.0},
               {"mean_wer_pct", n ? 100.0 * sum / n : 0.0}};
  atomic_write_file(out / "summary.json", summary.dump(2) + "\n");

  if (!paired_with.empty()) {
    // pair by utterance id against another condition's per-pair CSV
    std::istringstream in(read_text_file(paired_with));
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, double> other;
    while (std::getline(in, line)) {
      auto cols = split_csv_list(line);
      if (cols.size() < 7 || cols[6] == "1") continue;
      other[cols[0]] = std::stod(cols[5]);
    }
    std::vector<double> a, b;
    for (const auto& [id, w] : by_id) {
      auto it = other.find(id);
      if (it == other.end()) continue;
      a.push_back(w);
      b.push_back(it->second);
    }
    auto t = paired_t_test(a, b);
    json tj{{"n_pairs", a.size()},
            {"t_statistic", t.t_statistic},
            {"dof", t.dof},
            {"p_value", t.p_value},
            {"significant", t.significant}};
    atomic_write_file(ttest_out.empty() ? (out / "ttest.json").string()
                                        : ttest_out,
                      tj.dump(2) + "\n");
  }
  std::cerr << "eval-wer: scored " << n << " pairs, excluded " << excluded
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-asv

int cmd_eval_asv(const std::string& enroll_path, const std::string& test_path,
                 const std::string& out_dir, bool ordered) {
  auto enroll = read_embeddings_jsonl(read_text_file(enroll_path));
  fs::path out(out_dir);

  std::vector<Trial> trials;
  std::vector<std::pair<double, bool>> scores;
  std::string trials_csv = "enroll_id,test_id,label\n";
  std::string scores_csv = "enroll_id,test_id,label,score\n";

  if (test_path.empty()) {
    // single set: unordered (or ordered) exhaustive pairs
    trials = enumerate_trials(enroll, ordered);
    std::map<std::string, const Embedding*> by_id;
    for (const auto& e : enroll) by_id[e.utterance_id] = &e;
    for (const auto& t : trials) {
      double s = cosine_score(*by_id.at(t.enroll_id), *by_id.at(t.test_id));
      scores.push_back({s, t.is_target});
      std::string lbl = t.is_target ? "target" : "nontarget";
      trials_csv += t.enroll_id + "," + t.test_id + "," + lbl + "\n";
      scores_csv += t.enroll_id + "," + t.test_id + "," + lbl + "," +
                    format_double(s, 8) + "\n";
    }
  } else {
    // enroll-vs-test sweep: every cross pair except same-utterance ids
    auto test = read_embeddings_jsonl(read_text_file(test_path));
    std::vector<const Embedding*> eo, to;
    for (const auto& e : enroll) eo.push_back(&e);
    for (const auto& e : test) to.push_back(&e);
    auto by_id = [](const Embedding* a, const Embedding* b) {
      return a->utterance_id < b->utterance_id;
    };
    std::sort(eo.begin(), eo.end(), by_id);
    std::sort(to.begin(), to.end(), by_id);
    for (const auto* e : eo) {
      for (const auto* t : to) {
        if (e->utterance_id == t->utterance_id) continue;
        bool tgt = e->speaker_id == t->speaker_id;
        double s = cosine_score(*e, *t);
        scores.push_back({s, tgt});
        std::string lbl = tgt ? "target" : "nontarget";
        trials_csv += e->utterance_id + "," + t->utterance_id + "," + lbl + "\n";
        scores_csv += e->utterance_id + "," + t->utterance_id + "," + lbl +
                      "," + format_double(s, 8) + "\n";
      }
    }
  }

  atomic_write_file(out / "trials.csv", trials_csv);
  atomic_write_file(out / "scores.csv", scores_csv);

  std::size_t n_target = 0;
  for (const auto& [s, tgt] : scores) n_target += tgt;
  EerResult r = eer(scores);
  json ej{{"eer", r.eer},
          {"eer_pct", 100.0 * r.eer},
          {"threshold", r.threshold},
          {"n_target", n_target},
          {"n_nontarget", scores.size() - n_target}};
  atomic_write_file(out / "eer.json", ej.dump(2) + "\n");
  std::cerr << "eval-asv: " << scores.size() << " trials (" << n_target
            << " target), EER " << format_double(100.0 * r.eer, 2) << "%\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// kde

std::vector<double> read_wer_column(const std::string& per_pair_csv) {
  std::istringstream in(per_pair_csv);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  while (std::getline(in, line)) {
    auto cols = split_csv_list(line);
    if (cols.size() < 7 || cols[6] == "1") continue;
    out.push_back(std::stod(cols[5]));
  }
  return out;
}

int cmd_kde(const std::vector<std::string>& series_args,
            const std::string& out_svg, const std::string& out_dir,
            long grid_size, const std::string& title) {
  std::vector<SvgSeries> plot;
  for (const auto& arg : series_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos)
      throw ContractError("series must be label=path, got '" + arg + "'");
    std::string label = arg.substr(0, eq);
    std::string path = arg.substr(eq + 1);

    auto values = read_wer_column(read_text_file(path));
    std::vector<double> positives;
    double zero_frac = zero_mass_fraction(values, &positives);
    if (positives.size() < 2) {
      std::cerr << "kde: skipping '" << label
                << "': fewer than 2 positive WER values\n";
      continue;
    }
    // plot in WER% like the report tables
    for (auto& v : positives) v *= 100.0;
    auto curve = kde_log_wer(positives, static_cast<std::size_t>(grid_size));
    if (!out_dir.empty()) {
      atomic_write_file(fs::path(out_dir) / (label + ".csv"),
                        kde_curve_csv(curve));
      json meta{{"bandwidth", curve.bandwidth},
                {"zero_mass_fraction", zero_frac},
                {"n_positive", positives.size()},
                {"n_total", values.size()}};
      atomic_write_file(fs::path(out_dir) / (label + ".meta.json"),
                        meta.dump(2) + "\n");
    }
    plot.push_back({label, curve.grid, curve.density});
  }
  if (!out_svg.empty())
    atomic_write_file(out_svg,
                      render_svg_plot(plot, title.empty() ? "WER density" : title));
  std::cerr << "kde: " << plot.size() << " curves\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

// Expected layout under cells-dir:
//   <condition>/none/{per_pair.csv|eer.json}
//   <condition>/<type>/<position>/{per_pair.csv|eer.json}
int cmd_report(const std::string& kind, const std::string& cells_dir,
               const std::string& out_csv, const std::string& cells_out) {
  std::vector<std::string> types = {"noise", "delete", "reverse"};
  std::vector<std::string> positions = {"start", "middle", "end"};

  std::vector<std::string> conditions;
  for (const auto& entry : fs::directory_iterator(cells_dir))
    if (entry.is_directory()) conditions.push_back(entry.path().filename());
  std::sort(conditions.begin(), conditions.end());

  if (kind == "wer") {
    WerCells cells;
    auto load_cell = [&](const CellKey& key, const fs::path& dir) {
      fs::path f = dir / "per_pair.csv";
      if (!fs::exists(f)) return;
      std::istringstream in(read_text_file(f.string()));
      std::string line;
      std::getline(in, line);
      auto& vec = cells[key];
      while (std::getline(in, line)) {
        auto cols = split_csv_list(line);
        if (cols.size() < 7) continue;
        vec.push_back({std::stod(cols[5]), cols[6] == "1"});
      }
    };
    for (const auto& cond : conditions) {
      load_cell({cond, "none", "-"}, fs::path(cells_dir) / cond / "none");
      for (const auto& t : types)
        for (const auto& p : positions)
          load_cell({cond, t, p}, fs::path(cells_dir) / cond / t / p);
    }
    auto table = report_wer(cells);
    atomic_write_file(out_csv,
                      render_wer_table_csv(table, conditions, types, positions));
    if (!cells_out.empty())
      atomic_write_file(cells_out, render_wer_cells_csv(table));
  } else if (kind == "eer") {
    std::map<CellKey, std::optional<EerCellStats>> cells;
    auto load_cell = [&](const CellKey& key, const fs::path& dir) {
      fs::path f = dir / "eer.json";
      if (!fs::exists(f)) return;
      auto j = json::parse(read_text_file(f.string()));
      EerCellStats st;
      st.eer_pct = j.at("eer_pct").get<double>();
      st.n_trials = j.at("n_target").get<std::size_t>() +
                    j.at("n_nontarget").get<std::size_t>();
      cells[key] = st;
    };
    for (const auto& cond : conditions) {
      load_cell({cond, "none", "-"}, fs::path(cells_dir) / cond / "none");
      for (const auto& t : types)
        for (const auto& p : positions)
          load_cell({cond, t, p}, fs::path(cells_dir) / cond / t / p);
    }
    atomic_write_file(out_csv,
                      render_eer_table_csv(cells, conditions, types, positions));
  } else {
    std::cerr << "report: unknown kind '" << kind << "'\n";
    return kExitConfig;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// demo-corpus: a self-contained synthetic corpus for desk-scale runs.
// 9 "speakers" with utterance counts {10,9,8,8,7,7,7,6,6}; tone audio,
// TextGrids, random code sequences, simulated ASR hypotheses per grid cell,
// and synthetic embeddings per grid cell.

const char* kWords[] = {"alpha",  "bravo", "charlie", "delta", "echo",
                        "foxtrot", "golf",  "hotel",   "india", "juliet",
                        "kilo",   "lima",  "mike",    "november"};

std::uint64_t mix(std::uint64_t a, const std::string& s) {
  std::uint64_t h = a ^ 0x9e3779b97f4a7c15ull;
  for (char c : s) h = (h ^ std::uint64_t(std::uint8_t(c))) * 0x100000001b3ull;
  return h;
}

int cmd_demo_corpus(const std::string& out_dir, std::uint64_t seed) {
  fs::path root(out_dir);
  const int rate = 16000;
  const std::vector<std::size_t> utt_counts = {10, 9, 8, 8, 7, 7, 7, 6, 6};
  const std::vector<std::string> types = {"noise", "delete", "reverse"};
  const std::vector<std::string> positions = {"start", "middle", "end"};
  const std::vector<std::string> domains = {"wave", "codes"};
  const int emb_dim = 16;

  struct Utt {
    std::string id, speaker;
    AlignedUtterance align;
    std::vector<std::string> transcript;
  };
  std::vector<Utt> utts;

  for (std::size_t spk = 0; spk < utt_counts.size(); ++spk) {
    char spk_id[8];
    std::snprintf(spk_id, sizeof spk_id, "s%02zu", spk + 1);
    for (std::size_t k = 0; k < utt_counts[spk]; ++k) {
      char utt_id[16];
      std::snprintf(utt_id, sizeof utt_id, "%s_%03zu", spk_id, k + 1);
      std::mt19937_64 rng(mix(seed, utt_id));
      std::uniform_int_distribution<int> nw(7, 10);
      std::uniform_real_distribution<double> wdur(0.2, 0.4);

      Utt u;
      u.id = utt_id;
      u.speaker = spk_id;
      double t = 0.15;  // leading silence
      u.align.utterance_id = utt_id;
      u.align.speaker_id = spk_id;
      u.align.words.push_back({"SIL", 0.0, t, true});
      int n = nw(rng);
      for (int w = 0; w < n; ++w) {
        std::string label = kWords[rng() % (sizeof kWords / sizeof *kWords)];
        double d = wdur(rng);
        u.align.words.push_back({label, t, t + d, false});
        u.transcript.push_back(label);
        t += d;
      }
      u.align.words.push_back({"SIL", t, t + 0.15, true});
      u.align.total_duration_s = t + 0.15;

      // tone audio: one sinusoid per word, silence elsewhere
      Waveform wav;
      wav.sample_rate_hz = rate;
      wav.samples.assign(
          static_cast<std::size_t>(std::llround(u.align.total_duration_s * rate)),
          0.0f);
      for (const auto& wi : u.align.words) {
        if (wi.is_sil) continue;
        double freq = 180.0 + 40.0 * (wi.label[0] - 'a') + 15.0 * spk;
        auto span = span_from_seconds(wav, wi.start_s, wi.end_s);
        for (std::size_t i = span.start_idx; i < span.end_idx; ++i)
          wav.samples[i] = static_cast<float>(
              0.3 * std::sin(2.0 * M_PI * freq * i / rate));
      }
      atomic_write_file(root / "wavs" / (u.id + ".wav"), write_wav(wav));
      atomic_write_file(root / "textgrids" / (u.id + ".TextGrid"),
                        serialize_textgrid(u.align));

      CodeSequence codes;
      codes.codebook_size = 128;
      codes.code_rate_hz = kDefaultCodeRateHz;
      codes.codes.resize(static_cast<std::size_t>(
          std::llround(u.align.total_duration_s * codes.code_rate_hz)));
      for (auto& c : codes.codes) c = static_cast<int>(rng() % 128);
      atomic_write_file(root / "codes" / (u.id + ".json"),
                        to_json(codes).dump() + "\n");

      utts.push_back(std::move(u));
    }
  }

  // simulated ASR hypotheses: light token noise, with occasional long
  // babble to exercise the catastrophic-failure filter
  auto perturb = [&](const std::vector<std::string>& ref,
                     std::uint64_t h) -> std::string {
    std::mt19937_64 rng(h);
    std::vector<std::string> hyp = ref;
    std::size_t edits = rng() % 3;
    for (std::size_t e = 0; e < edits && !hyp.empty(); ++e)
      hyp[rng() % hyp.size()] = kWords[rng() % (sizeof kWords / sizeof *kWords)];
    if (rng() % 20 == 0)
      for (int i = 0; i < 8; ++i) hyp.push_back("babble");
    return tokens_to_line(hyp);
  };

  auto write_asr = [&](const std::string& name, const std::string& cell_tag,
                       bool masked, const std::string& pos) {
    std::string jsonl;
    for (const auto& u : utts) {
      std::vector<std::string> ref = u.transcript;
      if (masked)
        ref = masked_reference(u.transcript,
                               select_target(u.align, parse_position(pos)));
      json rec{{"utterance_id", u.id},
               {"reference", tokens_to_line(ref)},
               {"hypothesis", perturb(ref, mix(seed, u.id + "|" + cell_tag))}};
      jsonl += rec.dump() + "\n";
    }
    atomic_write_file(root / "asr" / (name + ".jsonl"), jsonl);
  };

  // synthetic speaker embeddings: speaker centroid + per-utterance jitter,
  // plus a mask-dependent perturbation for masked test sets
  auto embedding = [&](const Utt& u, double perturbation,
                       const std::string& tag) {
    std::mt19937_64 srng(mix(seed, u.speaker));
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(emb_dim);
    for (auto& x : v) x = g(srng);
    std::mt19937_64 urng(mix(seed, u.id + "#" + tag));
    for (auto& x : v) x += 0.3 * g(urng) + perturbation * g(urng);
    return v;
  };
  auto write_emb = [&](const std::string& name, double perturbation,
                       const std::string& tag) {
    std::string jsonl;
    for (const auto& u : utts) {
      json rec{{"utterance_id", u.id},
               {"speaker_id", u.speaker},
               {"vector", embedding(u, perturbation, tag)}};
      jsonl += rec.dump() + "\n";
    }
    atomic_write_file(root / "emb" / (name + ".jsonl"), jsonl);
  };

  write_emb("enroll", 0.0, "enroll");
  for (const auto& dom : domains) {
    write_asr(dom + "_none", dom + "_none", false, "");
    double dom_pert = dom == "wave" ? 0.2 : 1.2;
    write_emb(dom + "_none", dom_pert * 0.5, dom + "_none");
    for (const auto& t : types) {
      for (const auto& p : positions) {
        std::string cell = dom + "_" + t + "_" + p;
        write_asr(cell, cell, true, p);
        write_emb(cell, dom_pert, cell);
      }
    }
  }

  std::cerr << "demo-corpus: " << utts.size() << " utterances under "
            << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"word masking and privacy-evaluation toolkit"};
  app.require_subcommand(1);

  // select
  std::string sel_textgrids, sel_codes, sel_out, sel_eligible;
  double sel_max_rate = 5.0;
  long sel_min_codes = 300, sel_min_words = 7;
  bool sel_spk_avg = false, sel_speech_only = false, sel_no_codes = false;
  auto* sel = app.add_subcommand("select", "compute stats and filter eligible utterances");
  sel->add_option("--textgrids", sel_textgrids, "TextGrid directory")->required();
  sel->add_option("--codes", sel_codes, "code-sequence JSON directory");
  sel->add_option("--max-rate", sel_max_rate, "speaking rate bound (strict <)");
  sel->add_option("--min-codes", sel_min_codes, "code count bound (strict >)");
  sel->add_option("--min-words", sel_min_words, "word count bound (>=)");
  sel->add_flag("--speaker-average", sel_spk_avg, "apply the rate criterion per speaker");
  sel->add_flag("--speech-only-duration", sel_speech_only,
                "rate denominator excludes leading/trailing silence");
  sel->add_flag("--no-code-criterion", sel_no_codes, "disable the code-count criterion");
  sel->add_option("--out", sel_out, "stats CSV path (stdout if omitted)");
  sel->add_option("--eligible-out", sel_eligible, "eligible-subset CSV path");

  // mask
  ExperimentConfig mcfg;
  std::string m_config, m_types = "noise,delete,reverse",
              m_positions = "start,middle,end", m_domains = "wave,codes";
  bool m_no_rms = false, m_no_filter = false, m_random_offset = false;
  auto* msk = app.add_subcommand("mask", "run the mask grid over a corpus");
  msk->add_option("--config", m_config, "key = value config file (flags win)");
  msk->add_option("--audio", mcfg.audio_dir, "WAV directory");
  msk->add_option("--textgrids", mcfg.textgrid_dir, "TextGrid directory");
  msk->add_option("--codes", mcfg.codes_dir, "code-sequence JSON directory");
  msk->add_option("--out", mcfg.output_dir, "output directory");
  msk->add_option("--type", m_types, "mask types (comma list)");
  msk->add_option("--position", m_positions, "mask positions (comma list)");
  msk->add_option("--domain", m_domains, "mask domains (comma list)");
  msk->add_option("--n-words", mcfg.n_words, "words per mask");
  msk->add_option("--sil-token", mcfg.sil_token, "silence token literal");
  msk->add_option("--masker-file", mcfg.masker_file, "external masker WAV");
  msk->add_option("--noise-codes", mcfg.noise_codes_file, "noise-only code JSON");
  msk->add_option("--masker-seed,--seed", mcfg.seed, "top-level seed");
  msk->add_flag("--no-rms-match", m_no_rms, "do not level-match the noise mask");
  msk->add_flag("--random-noise-offset", m_random_offset,
                "seed-controlled random offset into the masker");
  msk->add_flag("--no-filter", m_no_filter, "skip eligibility filtering");

  // eval-wer
  std::string w_transcripts, w_out, w_paired, w_ttest_out;
  bool w_no_norm = false;
  long w_max_excess = 30;
  auto* evw = app.add_subcommand("eval-wer", "score hypothesis transcripts");
  evw->add_option("--transcripts", w_transcripts, "transcript JSONL")->required();
  evw->add_option("--out", w_out, "output directory")->required();
  evw->add_flag("--no-normalize", w_no_norm, "skip token normalization");
  evw->add_option("--max-excess-chars", w_max_excess,
                  "failure-filter threshold (strict >)");
  evw->add_option("--paired-with", w_paired,
                  "per-pair CSV of another condition for a paired t-test");
  evw->add_option("--ttest-out", w_ttest_out, "t-test JSON path");

  // eval-asv
  std::string a_enroll, a_test, a_out;
  bool a_ordered = false;
  auto* eva = app.add_subcommand("eval-asv", "enumerate trials, score, compute EER");
  eva->add_option("--enroll", a_enroll, "enrollment embedding JSONL")->required();
  eva->add_option("--test", a_test, "test embedding JSONL (single-set mode if omitted)");
  eva->add_option("--out", a_out, "output directory")->required();
  eva->add_flag("--ordered", a_ordered, "emit both directions of each pair");

  // kde
  std::vector<std::string> k_series;
  std::string k_svg, k_dir, k_title;
  long k_grid = 512;
  auto* kde = app.add_subcommand("kde", "log-domain WER density curves");
  kde->add_option("series", k_series, "label=per_pair.csv entries")->required();
  kde->add_option("--out-svg", k_svg, "SVG plot path");
  kde->add_option("--out-dir", k_dir, "per-series curve CSV directory");
  kde->add_option("--grid-size", k_grid, "grid points");
  kde->add_option("--title", k_title, "plot title");

  // report
  std::string r_kind, r_cells, r_out, r_cells_out;
  auto* rep = app.add_subcommand("report", "aggregate per-cell results into tables");
  rep->add_option("--kind", r_kind, "wer or eer")->required();
  rep->add_option("--cells-dir", r_cells, "per-cell results directory")->required();
  rep->add_option("--out", r_out, "table CSV path")->required();
  rep->add_option("--cells-out", r_cells_out, "per-cell breakdown CSV path");

  // demo-corpus
  std::string d_out;
  std::uint64_t d_seed = 0;
  auto* demo = app.add_subcommand("demo-corpus", "generate a synthetic desk-scale corpus");
  demo->add_option("--out", d_out, "corpus directory")->required();
  demo->add_option("--seed", d_seed, "generation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sel->parsed())
      return cmd_select(sel_textgrids, sel_codes, sel_max_rate, sel_min_codes,
                        sel_min_words, sel_spk_avg, sel_speech_only,
                        sel_no_codes, sel_out, sel_eligible);
    if (msk->parsed()) {
      if (!m_config.empty()) {
        auto kv = parse_config_file(read_text_file(m_config));
        auto get = [&](const char* k) -> std::optional<std::string> {
          auto it = kv.find(k);
          if (it == kv.end()) return std::nullopt;
          return it->second;
        };
        // flags win over config values
        if (auto v = get("audio_dir"); v && mcfg.audio_dir.empty()) mcfg.audio_dir = *v;
        if (auto v = get("textgrid_dir"); v && mcfg.textgrid_dir.empty()) mcfg.textgrid_dir = *v;
        if (auto v = get("codes_dir"); v && mcfg.codes_dir.empty()) mcfg.codes_dir = *v;
        if (auto v = get("output_dir"); v && mcfg.output_dir.empty()) mcfg.output_dir = *v;
        if (auto v = get("masker_file"); v && mcfg.masker_file.empty()) mcfg.masker_file = *v;
        if (auto v = get("seed"); v && mcfg.seed == 0) mcfg.seed = std::stoull(*v);
        if (auto v = get("types"); v && !msk->count("--type")) m_types = *v;
        if (auto v = get("positions"); v && !msk->count("--position")) m_positions = *v;
        if (auto v = get("domains"); v && !msk->count("--domain")) m_domains = *v;
      }
      if (mcfg.textgrid_dir.empty() || mcfg.output_dir.empty()) {
        std::cerr << "mask: --textgrids and --out are required\n";
        return kExitConfig;
      }
      mcfg.types.clear();
      for (const auto& t : split_csv_list(m_types))
        mcfg.types.push_back(parse_mask_type(t));
      mcfg.positions.clear();
      for (const auto& p : split_csv_list(m_positions))
        mcfg.positions.push_back(parse_position(p));
      mcfg.domains.clear();
      for (const auto& d : split_csv_list(m_domains))
        mcfg.domains.push_back(parse_domain(d));
      mcfg.rms_match = !m_no_rms;
      mcfg.random_noise_offset = m_random_offset;
      mcfg.apply_criteria = !m_no_filter;
      if (mcfg.codes_dir.empty()) mcfg.criteria.min_codes_exclusive.reset();
      return cmd_mask(mcfg);
    }
    if (evw->parsed())
      return cmd_eval_wer(w_transcripts, w_out, w_no_norm, w_max_excess,
                          w_paired, w_ttest_out);
    if (eva->parsed()) return cmd_eval_asv(a_enroll, a_test, a_out, a_ordered);
    if (kde->parsed()) return cmd_kde(k_series, k_svg, k_dir, k_grid, k_title);
    if (rep->parsed()) return cmd_report(r_kind, r_cells, r_out, r_cells_out);
    if (demo->parsed()) return cmd_demo_corpus(d_out, d_seed);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}
