#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "wordmask/io.hpp"
#include "wordmask/pipeline.hpp"
#include "wordmask/report.hpp"

using namespace wordmask;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("wordmask_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

AlignedUtterance tiny_utt(const std::string& id, int n_words) {
  AlignedUtterance u;
  u.utterance_id = id;
  double t = 0.1;
  u.words.push_back({"SIL", 0.0, t, true});
  for (int i = 0; i < n_words; ++i) {
    u.words.push_back({"w" + std::to_string(i), t, t + 0.25, false});
    t += 0.25;
  }
  u.words.push_back({"SIL", t, t + 0.1, true});
  u.total_duration_s = t + 0.1;
  return u;
}

void write_tiny_corpus(const fs::path& root, int n_utts) {
  for (int k = 0; k < n_utts; ++k) {
    std::string id = "spk_" + std::to_string(100 + k);
    auto u = tiny_utt(id, 8);
    atomic_write_file(root / "tg" / (id + ".TextGrid"), serialize_textgrid(u));

    Waveform w;
    w.sample_rate_hz = 16000;
    w.samples.assign(
        static_cast<std::size_t>(u.total_duration_s * 16000), 0.0f);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      w.samples[i] = 0.2f * std::sin(0.05f * i);
    atomic_write_file(root / "wav" / (id + ".wav"), write_wav(w));

    CodeSequence c;
    c.codebook_size = 32;
    c.code_rate_hz = 250.0;
    c.codes.resize(static_cast<std::size_t>(u.total_duration_s * 250.0));
    for (std::size_t i = 0; i < c.codes.size(); ++i)
      c.codes[i] = static_cast<int>((i * 7) % 32);
    atomic_write_file(root / "codes" / (id + ".json"), to_json(c).dump());
  }
}

}  // namespace

TEST_CASE("config file parsing") {
  auto kv = parse_config_file(
      "# comment\naudio_dir = /tmp/a\nseed = 42\ntypes = \"noise,delete\"\n");
  CHECK(kv.at("audio_dir") == "/tmp/a");
  CHECK(kv.at("seed") == "42");
  CHECK(kv.at("types") == "noise,delete");
  CHECK_THROWS_AS(parse_config_file("not a pair\n"), ParseError);
}

TEST_CASE("transcript and embedding JSONL readers") {
  auto pairs = read_transcripts_jsonl(
      "{\"utterance_id\":\"u1\",\"reference\":\"Hello world\","
      "\"hypothesis\":\"hello word\"}\n");
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].reference == std::vector<std::string>{"hello", "world"});
  CHECK(pairs[0].raw_reference_chars == 11);

  CHECK_THROWS_AS(read_transcripts_jsonl("{broken\n"), ParseError);

  auto embs = read_embeddings_jsonl(
      "{\"utterance_id\":\"u1\",\"speaker_id\":\"s1\",\"vector\":[1,2]}\n");
  REQUIRE(embs.size() == 1);
  CHECK(embs[0].vector == std::vector<double>{1.0, 2.0});
}

TEST_CASE("run_mask_grid emits the full grid deterministically") {
  TempDir tmp;
  write_tiny_corpus(tmp.path, 2);

  ExperimentConfig cfg;
  cfg.textgrid_dir = (tmp.path / "tg").string();
  cfg.audio_dir = (tmp.path / "wav").string();
  cfg.codes_dir = (tmp.path / "codes").string();
  cfg.output_dir = (tmp.path / "out1").string();
  cfg.seed = 9;
  cfg.criteria.min_codes_exclusive = 300;

  auto r1 = run_mask_grid(cfg);
  CHECK(r1.errors.empty());
  // 2 utterances x 3 types x 3 positions x 2 domains
  CHECK(r1.emitted == 36);
  CHECK(r1.utterance_ids.size() == 2);

  std::size_t wavs = 0, manifests = 0;
  for (const auto& e : fs::recursive_directory_iterator(tmp.path / "out1")) {
    if (e.path().extension() == ".wav") ++wavs;
    if (e.path().parent_path().filename() == "manifests") ++manifests;
  }
  CHECK(wavs == 18);
  CHECK(manifests == 36);

  cfg.output_dir = (tmp.path / "out2").string();
  auto r2 = run_mask_grid(cfg);
  CHECK(r2.emitted == r1.emitted);
  for (const auto& e : fs::recursive_directory_iterator(tmp.path / "out1")) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), tmp.path / "out1");
    auto other = tmp.path / "out2" / rel;
    REQUIRE(fs::exists(other));
    CHECK(read_binary_file(e.path().string()) ==
          read_binary_file(other.string()));
  }
}

TEST_CASE("run_mask_grid manifests agree with recomputed spans") {
  TempDir tmp;
  write_tiny_corpus(tmp.path, 2);

  ExperimentConfig cfg;
  cfg.textgrid_dir = (tmp.path / "tg").string();
  cfg.audio_dir = (tmp.path / "wav").string();
  cfg.output_dir = (tmp.path / "out").string();
  cfg.domains = {MaskDomain::kWave};
  cfg.criteria.min_codes_exclusive.reset();  // no codes loaded in this case
  run_mask_grid(cfg);

  auto corpus = load_corpus(cfg);
  for (const auto& e : fs::directory_iterator(tmp.path / "out" / "manifests")) {
    auto j = nlohmann::json::parse(read_text_file(e.path().string()));
    const auto& u = corpus.at(j.at("utterance_id").get<std::string>());
    auto target = select_target(
        u.alignment, parse_position(j.at("position").get<std::string>()));
    CHECK(j.at("span_start_s").get<double>() ==
          Catch::Approx(target.span_start_s).margin(1e-6));
    CHECK(j.at("span_end_s").get<double>() ==
          Catch::Approx(target.span_end_s).margin(1e-6));
  }
}

TEST_CASE("run_mask_grid fails cleanly on an empty grid or corpus") {
  TempDir tmp;
  fs::create_directories(tmp.path / "empty");
  ExperimentConfig cfg;
  cfg.textgrid_dir = (tmp.path / "empty").string();
  cfg.output_dir = (tmp.path / "out").string();
  CHECK_THROWS_AS(run_mask_grid(cfg), ContractError);

  write_tiny_corpus(tmp.path, 1);
  cfg.textgrid_dir = (tmp.path / "tg").string();
  cfg.types.clear();
  CHECK_THROWS_AS(run_mask_grid(cfg), ContractError);
}

TEST_CASE("report_wer aggregates means and tracks exclusions") {
  WerCells cells;
  cells[{"wave", "noise", "start"}] = {{0.10, false}, {0.30, false}};
  cells[{"wave", "noise", "middle"}] = {{0.50, true}};  // all filtered
  auto table = report_wer(cells);

  REQUIRE(table.at({"wave", "noise", "start"}).has_value());
  CHECK(table.at({"wave", "noise", "start"})->mean_wer_pct ==
        Catch::Approx(20.0));
  CHECK_FALSE(table.at({"wave", "noise", "middle"}).has_value());

  auto csv = render_wer_cells_csv(table);
  CHECK(csv.find("wave,noise,middle,n/a") != std::string::npos);
  CHECK(csv.find("wave,noise,start,20.00") != std::string::npos);
}

TEST_CASE("eer table renders the 1 + 9 column layout") {
  std::map<CellKey, std::optional<EerCellStats>> cells;
  cells[{"wave", "none", "-"}] = EerCellStats{0.04, 100};
  cells[{"wave", "noise", "start"}] = EerCellStats{2.5, 100};
  auto csv = render_eer_table_csv(cells, {"wave"}, {"noise", "delete", "reverse"},
                                  {"start", "middle", "end"});
  auto header_end = csv.find('\n');
  std::string header = csv.substr(0, header_end);
  CHECK(std::count(header.begin(), header.end(), ',') == 10);
  CHECK(csv.find("wave,0.04,2.50,n/a") != std::string::npos);
}
