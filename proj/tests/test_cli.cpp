#include <sys/wait.h>
#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avseg/config.hpp"
#include "avseg/embedder.hpp"
#include "avseg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("avseg-cli-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& sub) const { return path / sub; }
};

int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
  std::string cmd = std::string("\"") + AVSEG_CLI_PATH + "\" " + args;
  cmd += stdout_to.empty() ? " > /dev/null" : (" > " + stdout_to.string());
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

// small corpus settings shared by most pipeline tests
avseg::RunConfig small_config(double noise) {
  avseg::RunConfig cfg;
  cfg.synth.n_lectures = 3;
  cfg.synth.k_min = 2;
  cfg.synth.k_max = 4;
  cfg.synth.clips_per_lecture = 12;
  cfg.synth.clip_len_s = 10.0;
  cfg.synth.noise_sigma = noise;
  cfg.synth.dims = {8, 8, 6, 6};
  cfg.embed_dim = 12;
  cfg.train.batch_size = 4;
  cfg.train.epochs = 2;
  cfg.train.lr = 1e-3;
  return cfg;
}

fs::path write_config(const TempDir& tmp, const avseg::RunConfig& cfg,
                      const std::string& name = "cfg.json") {
  const fs::path p = tmp / name;
  avseg::save_run_config(cfg, p);
  return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST_CASE("synth writes a deterministic corpus") {
  TempDir tmp("synth");
  const fs::path cfg = write_config(tmp, small_config(0.2));
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 5 --out " + q(tmp / "a") + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 5 --out " + q(tmp / "b") + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 6 --out " + q(tmp / "c") + " synth") == 0);

  CHECK(count_lines(tmp / "a" / "manifest.jsonl") == 3);
  const auto manifest = avseg::read_manifest(tmp / "a" / "manifest.jsonl");
  REQUIRE(manifest.size() == 3);
  for (const auto& e : manifest) {
    const std::string rel = e.path;
    CHECK(avseg::slurp(tmp / "a" / rel) == avseg::slurp(tmp / "b" / rel));
    CHECK(avseg::slurp(tmp / "a" / rel) != avseg::slurp(tmp / "c" / rel));
  }
  const auto corpus = avseg::read_corpus(tmp / "a");
  REQUIRE(corpus.size() == 3);
  CHECK(corpus.front().lecture_id == "c00_l0000");
  CHECK(corpus.front().clips.size() == 12);
  CHECK(corpus.front().gt.has_value());
}

TEST_CASE("synth rejects invalid settings with exit 1") {
  TempDir tmp("synth-bad");
  auto cfg = small_config(0.1);
  cfg.synth.n_lectures = 0;
  CHECK(run_cli("--config " + q(write_config(tmp, cfg)) + " --out " + q(tmp / "x") + " synth") ==
        1);
}

TEST_CASE("malformed command lines exit 1") {
  TempDir tmp("badflags");
  CHECK(run_cli("") == 1);               // missing subcommand
  CHECK(run_cli("frobnicate") == 1);     // unknown subcommand
  CHECK(run_cli("synth --nope") == 1);   // unknown flag
}

TEST_CASE("clipify groups cues and reports them as JSON") {
  TempDir tmp("clipify");
  const fs::path cues = tmp / "cues.json";
  avseg::spit(cues, json::array({{{"start_s", 0.0}, {"end_s", 6.0}},
                                 {{"start_s", 6.0}, {"end_s", 12.0}},
                                 {{"start_s", 12.0}, {"end_s", 14.0}}})
                        .dump());
  const fs::path out = tmp / "clips.json";
  REQUIRE(run_cli("clipify --cues " + q(cues) + " --min 10 --max 15 --clips-out " + q(out)) == 0);
  const json clips = json::parse(avseg::slurp(out));
  REQUIRE(clips.size() == 1);
  CHECK(clips[0]["start_s"] == 0.0);
  CHECK(clips[0]["end_s"] == 14.0);
  CHECK(clips[0]["cue_indices"] == json::array({0, 1, 2}));

  CHECK(run_cli("clipify --cues " + q(tmp / "absent.json")) == 2);
  avseg::spit(cues, json::array({{{"start_s", 5.0}, {"end_s", 4.0}}}).dump());
  CHECK(run_cli("clipify --cues " + q(cues)) == 1);
}

TEST_CASE("zero-noise pipeline scores perfectly end to end") {
  TempDir tmp("pipeline");
  const fs::path cfg = write_config(tmp, small_config(0.0));
  const fs::path corpus = tmp / "corpus";
  const fs::path segs = tmp / "segs";
  const fs::path evald = tmp / "eval";
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(segs) + " segment --corpus " + q(corpus) +
                  " --k-source gt --features raw") == 0);

  const auto lectures = avseg::read_corpus(corpus);
  for (const auto& lec : lectures) {
    const auto rec = avseg::read_segmentation(segs / (lec.lecture_id + ".seg.json"));
    CHECK(rec.lecture_id == lec.lecture_id);
    CHECK(rec.seg.k == lec.gt->k);
    CHECK(rec.seg.labels == lec.gt->labels);
  }

  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(evald) + " eval --corpus " + q(corpus) +
                  " --pred " + q(segs)) == 0);
  const json ev = json::parse(avseg::slurp(evald / "eval.json"));
  CHECK(ev.at("mean").at("nmi").get<double>() >= 0.999);
  CHECK(ev.at("mean").at("mof").get<double>() == 1.0);
  CHECK(ev.at("mean").at("iou").get<double>() >= 0.999);
  CHECK(ev.at("mean").at("bs_at").at("30").get<double>() == 100.0);
  CHECK(ev.at("per_lecture").size() == 3);
}

TEST_CASE("train writes checkpoints, state, and a loss trace") {
  TempDir tmp("train");
  const fs::path cfg = write_config(tmp, small_config(0.2));
  const fs::path corpus = tmp / "corpus";
  const fs::path out = tmp / "out";
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 3 --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(out) + " train --corpus " + q(corpus)) ==
          0);

  const auto params = avseg::load_params(out / "checkpoint_main.avle");
  CHECK(params.dims().e == 12);
  const auto state = avseg::load_train_state(out / "train_state_main.avls");
  CHECK(state.epochs_done == 2);
  CHECK(state.adam_t > 0);

  std::ifstream trace(out / "loss_main.csv");
  std::string line;
  REQUIRE(std::getline(trace, line));
  CHECK(line == "epoch,mean_loss");
  REQUIRE(std::getline(trace, line));
  CHECK(line.rfind("0,", 0) == 0);
  REQUIRE(std::getline(trace, line));
  CHECK(line.rfind("1,", 0) == 0);
  CHECK_FALSE(std::getline(trace, line));

  // a custom stage tag names all three artifacts
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(out) + " train --corpus " + q(corpus) +
                  " --stage s2") == 0);
  CHECK(fs::exists(out / "checkpoint_s2.avle"));
  CHECK(fs::exists(out / "train_state_s2.avls"));
  CHECK(fs::exists(out / "loss_s2.csv"));
}

TEST_CASE("resumed training matches an uninterrupted run byte for byte") {
  TempDir tmp("resume");
  const fs::path corpus = tmp / "corpus";
  auto base = small_config(0.2);
  REQUIRE(run_cli("--config " + q(write_config(tmp, base, "synth.json")) + " --seed 7 --out " +
                  q(corpus) + " synth") == 0);

  auto two = base;
  two.train.epochs = 2;
  const fs::path straight = tmp / "straight";
  REQUIRE(run_cli("--config " + q(write_config(tmp, two, "two.json")) + " --out " + q(straight) +
                  " train --corpus " + q(corpus)) == 0);

  auto one = base;
  one.train.epochs = 1;
  const fs::path resumed = tmp / "resumed";
  REQUIRE(run_cli("--config " + q(write_config(tmp, one, "one.json")) + " --out " + q(resumed) +
                  " train --corpus " + q(corpus)) == 0);
  REQUIRE(run_cli("--config " + q(tmp / "two.json") + " --out " + q(resumed) +
                  " train --corpus " + q(corpus) + " --resume") == 0);

  CHECK(avseg::slurp(straight / "checkpoint_main.avle") ==
        avseg::slurp(resumed / "checkpoint_main.avle"));
  CHECK(avseg::slurp(straight / "train_state_main.avls") ==
        avseg::slurp(resumed / "train_state_main.avls"));
  CHECK(avseg::slurp(straight / "loss_main.csv") == avseg::slurp(resumed / "loss_main.csv"));
}

TEST_CASE("segment uses learned features when given a checkpoint") {
  TempDir tmp("learned");
  const fs::path cfg = write_config(tmp, small_config(0.4));
  const fs::path corpus = tmp / "corpus";
  const fs::path model = tmp / "model";
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 11 --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(model) + " train --corpus " + q(corpus)) ==
          0);
  const fs::path ckpt = model / "checkpoint_main.avle";

  for (const std::string phi : {"both", "clip", "text"}) {
    const fs::path out = tmp / ("segs_" + phi);
    REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(out) + " segment --corpus " + q(corpus) +
                    " --checkpoint " + q(ckpt) + " --k-source gt --phi " + phi) == 0);
  }
  // the tower slices genuinely change the result on a noisy corpus
  bool any_differs = false;
  for (const auto& lec : avseg::read_corpus(corpus)) {
    const auto both = avseg::read_segmentation(tmp / "segs_both" / (lec.lecture_id + ".seg.json"));
    const auto text = avseg::read_segmentation(tmp / "segs_text" / (lec.lecture_id + ".seg.json"));
    if (both.seg.labels != text.seg.labels) any_differs = true;
  }
  CHECK(any_differs);

  CHECK(run_cli("segment --corpus " + q(corpus) + " --features learned --k-source gt --out " +
                q(tmp / "nock")) == 2);  // learned features need a checkpoint
  CHECK(run_cli("segment --corpus " + q(corpus) + " --k-source fixed:0 --out " + q(tmp / "k0")) ==
        1);
}

TEST_CASE("every segmentation method composes with eval") {
  TempDir tmp("methods");
  const fs::path cfg = write_config(tmp, small_config(0.3));
  const fs::path corpus = tmp / "corpus";
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 13 --out " + q(corpus) + " synth") == 0);

  const std::vector<std::string> invocations{
      "segment --k-source gt",
      "segment --k-source fixed:3",
      "segment --k-source second_last",
      "segment --k-source third_last",
      "segment --k-source gt --raw-modalities v2d,text",
      "baseline --method naive --k-source gt",
      "baseline --method kmeans --k-source gt",
      "baseline --method cte --k-source fixed:2",
  };
  int idx = 0;
  for (const auto& inv : invocations) {
    const fs::path segs = tmp / ("segs" + std::to_string(idx));
    const fs::path evald = tmp / ("eval" + std::to_string(idx));
    REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(segs) + " " + inv + " --corpus " +
                    q(corpus)) == 0);
    REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(evald) + " eval --corpus " + q(corpus) +
                    " --pred " + q(segs)) == 0);
    CHECK(fs::exists(evald / "eval.json"));
    ++idx;
  }

  // auto k-sources are only defined for the hierarchy method
  CHECK(run_cli("--config " + q(cfg) + " --out " + q(tmp / "bad") +
                " baseline --method kmeans --k-source second_last --corpus " + q(corpus)) == 1);
}

TEST_CASE("naive baseline with fixed K splits into equal bins") {
  TempDir tmp("naive");
  const fs::path cfg = write_config(tmp, small_config(0.3));
  const fs::path corpus = tmp / "corpus";
  const fs::path segs = tmp / "segs";
  REQUIRE(run_cli("--config " + q(cfg) + " --seed 17 --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--out " + q(segs) + " baseline --method naive --k-source fixed:3 --corpus " +
                  q(corpus)) == 0);
  for (const auto& lec : avseg::read_corpus(corpus)) {
    const auto rec = avseg::read_segmentation(segs / (lec.lecture_id + ".seg.json"));
    CHECK(rec.seg.k == 3);  // 12 uniform clips split 4/4/4
    CHECK(rec.seg.contiguous);
    CHECK(rec.method == "naive");
  }
}

TEST_CASE("eval failure modes map to exit codes") {
  TempDir tmp("evalcodes");
  const fs::path cfg = write_config(tmp, small_config(0.2));
  const fs::path corpus = tmp / "corpus";
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(corpus) + " synth") == 0);
  CHECK(run_cli("--config " + q(cfg) + " --out " + q(tmp / "e") + " eval --corpus " + q(corpus) +
                " --pred " + q(tmp / "no-such-dir")) == 2);
  CHECK(run_cli("--config " + q(cfg) + " --out " + q(tmp / "e2") + " eval --corpus " +
                q(tmp / "no-corpus") + " --pred " + q(tmp / "nor-this")) == 2);
  CHECK(run_cli("eval --pred " + q(tmp / "x")) == 1);  // no corpus configured anywhere
}

TEST_CASE("eval groups courses and report reformats the stored table") {
  TempDir tmp("report");
  auto rc = small_config(0.0);
  rc.synth.n_lectures = 12;  // two course prefixes: lectures 0-9 and 10-11
  const fs::path cfg = write_config(tmp, rc);
  const fs::path corpus = tmp / "corpus";
  const fs::path segs = tmp / "segs";
  const fs::path evald = tmp / "eval";
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(segs) + " segment --corpus " + q(corpus) +
                  " --k-source gt") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(evald) + " eval --corpus " + q(corpus) +
                  " --pred " + q(segs) + " --by-course") == 0);

  const json ev = json::parse(avseg::slurp(evald / "eval.json"));
  REQUIRE(ev.contains("groups"));
  CHECK(ev.at("groups").contains("c00"));
  CHECK(ev.at("groups").contains("c01"));

  const fs::path table = tmp / "table.txt";
  REQUIRE(run_cli("report --eval " + q(evald / "eval.json") + " --table-out " + q(table)) == 0);
  const std::string text = avseg::slurp(table);
  CHECK(text.find("NMI") != std::string::npos);
  CHECK(text.find("BS@30") != std::string::npos);
  CHECK(text.find("c00") != std::string::npos);
  CHECK(text.find("mean") != std::string::npos);

  CHECK(run_cli("report --eval " + q(tmp / "missing.json")) == 2);
}

TEST_CASE("embed dumps one embedding file per lecture") {
  TempDir tmp("embed");
  const fs::path cfg = write_config(tmp, small_config(0.2));
  const fs::path corpus = tmp / "corpus";
  const fs::path model = tmp / "model";
  const fs::path dumps = tmp / "dumps";
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(model) + " train --corpus " + q(corpus)) ==
          0);
  REQUIRE(run_cli("--jobs 2 --out " + q(dumps) + " embed --corpus " + q(corpus) +
                  " --checkpoint " + q(model / "checkpoint_main.avle")) == 0);
  for (const auto& lec : avseg::read_corpus(corpus)) {
    const auto emb = avseg::load_embeddings(dumps / (lec.lecture_id + ".avlz"));
    CHECK(emb.f.rows() == static_cast<Eigen::Index>(lec.clips.size()));
    CHECK(emb.f.cols() == 12);
  }
  CHECK(run_cli("--out " + q(tmp / "d2") + " embed --corpus " + q(corpus) + " --checkpoint " +
                q(tmp / "missing.avle")) == 2);
}

TEST_CASE("retrieve ranks clips for a raw text query") {
  TempDir tmp("retrieve");
  const fs::path cfg = write_config(tmp, small_config(0.1));
  const fs::path corpus = tmp / "corpus";
  const fs::path model = tmp / "model";
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(corpus) + " synth") == 0);
  REQUIRE(run_cli("--config " + q(cfg) + " --out " + q(model) + " train --corpus " + q(corpus)) ==
          0);

  // query with the raw text feature of a real clip
  const auto lectures = avseg::read_corpus(corpus);
  const auto& probe = lectures.front().clips.front();
  const fs::path query = tmp / "query.json";
  avseg::spit(query, json(probe.text).dump());

  const fs::path results = tmp / "results.json";
  REQUIRE(run_cli("retrieve --corpus " + q(corpus) + " --checkpoint " +
                  q(model / "checkpoint_main.avle") + " --query " + q(query) +
                  " --top-k 3 --results-out " + q(results)) == 0);
  const json hits = json::parse(avseg::slurp(results));
  REQUIRE(hits.size() == 3);
  double prev = 1.0 + 1e-12;
  for (std::size_t r = 0; r < hits.size(); ++r) {
    CHECK(hits[r].at("rank") == r + 1);
    const double score = hits[r].at("score").get<double>();
    CHECK(score <= prev);
    prev = score;
  }

  CHECK(run_cli("retrieve --corpus " + q(corpus) + " --checkpoint " + q(tmp / "nope.avle") +
                " --query " + q(query)) == 2);
  avseg::spit(tmp / "short.json", "[0.5, 0.25]");
  CHECK(run_cli("retrieve --corpus " + q(corpus) + " --checkpoint " +
                q(model / "checkpoint_main.avle") + " --query " + q(tmp / "short.json")) == 1);
}
