// Command-line front end for the lecture segmentation pipeline: synthetic
// corpora, clip construction, embedding training, segmentation, baselines,
// evaluation, and retrieval. Exit codes: 0 ok, 1 validation, 2 missing
// artifact, 3 numerical failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "avseg/baselines.hpp"
#include "avseg/clipify.hpp"
#include "avseg/config.hpp"
#include "avseg/embedder.hpp"
#include "avseg/errors.hpp"
#include "avseg/io.hpp"
#include "avseg/metrics.hpp"
#include "avseg/synthetic.hpp"
#include "avseg/twfinch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(avseg::Errc code) {
  switch (code) {
    case avseg::Errc::missing_artifact:
      return 2;
    case avseg::Errc::numeric:
      return 3;
    default:
      return 1;
  }
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct KSource {
  enum class Kind { gt, second_last, third_last, fixed } kind = Kind::gt;
  int fixed_k = 0;
};

KSource parse_k_source(const std::string& s) {
  KSource out;
  if (s == "gt") {
    out.kind = KSource::Kind::gt;
  } else if (s == "second_last") {
    out.kind = KSource::Kind::second_last;
  } else if (s == "third_last") {
    out.kind = KSource::Kind::third_last;
  } else if (s.rfind("fixed:", 0) == 0) {
    out.kind = KSource::Kind::fixed;
    try {
      out.fixed_k = std::stoi(s.substr(6));
    } catch (const std::exception&) {
      avseg::fail(avseg::Errc::validation, "bad k-source '" + s + "'");
    }
    avseg::require_valid(out.fixed_k >= 1, "fixed k must be >= 1");
  } else {
    avseg::fail(avseg::Errc::validation,
                "k-source must be gt | second_last | third_last | fixed:K");
  }
  return out;
}

struct RawSelection {
  bool v2d = true, v3d = true, ocr = true, text = true;
};

RawSelection parse_raw_modalities(const std::string& csv) {
  RawSelection sel{false, false, false, false};
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    const std::string tok = csv.substr(pos, comma - pos);
    if (tok == "v2d")
      sel.v2d = true;
    else if (tok == "v3d")
      sel.v3d = true;
    else if (tok == "ocr")
      sel.ocr = true;
    else if (tok == "text")
      sel.text = true;
    else if (!tok.empty())
      avseg::fail(avseg::Errc::validation, "unknown modality '" + tok + "'");
    pos = comma + 1;
  }
  avseg::require_valid(sel.v2d || sel.v3d || sel.ocr || sel.text, "no raw modalities selected");
  return sel;
}

Eigen::VectorXd raw_phi(const avseg::ClipFeatureRecord& rec, const RawSelection& sel) {
  std::vector<const std::vector<float>*> parts;
  if (sel.v2d) parts.push_back(&rec.v2d);
  if (sel.v3d) parts.push_back(&rec.v3d);
  if (sel.ocr) parts.push_back(&rec.ocr);
  if (sel.text) parts.push_back(&rec.text);
  std::size_t total = 0;
  for (const auto* p : parts) total += p->size();
  Eigen::VectorXd phi(static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const auto* p : parts)
    for (float x : *p) phi[at++] = static_cast<double>(x);
  return phi;
}

std::string course_of(const std::string& lecture_id) {
  const std::size_t us = lecture_id.find('_');
  return us == std::string::npos ? lecture_id : lecture_id.substr(0, us);
}

// ---- subcommand bodies ----

int cmd_synth(const avseg::RunConfig& cfg, const fs::path& out_dir) {
  const std::vector<avseg::Lecture> lectures = avseg::generate_synthetic(cfg.synth);
  avseg::write_corpus(lectures, out_dir);
  std::printf("wrote %zu lectures to %s\n", lectures.size(), out_dir.string().c_str());
  return 0;
}

int cmd_clipify(const fs::path& cues_path, double min_len, double max_len,
                const std::string& out_path) {
  json j;
  try {
    j = json::parse(avseg::slurp(cues_path));
  } catch (const json::exception& e) {
    avseg::fail(avseg::Errc::validation, std::string("bad cue JSON: ") + e.what());
  }
  std::vector<avseg::SubtitleCue> cues;
  for (const auto& c : j) {
    avseg::SubtitleCue cue;
    cue.start_s = c.at("start_s").get<double>();
    cue.end_s = c.at("end_s").get<double>();
    if (c.contains("text")) cue.text = c.at("text").get<std::string>();
    cues.push_back(std::move(cue));
  }
  const std::vector<avseg::ClipSpan> clips = avseg::clipify(cues, min_len, max_len);
  json out = json::array();
  for (const auto& clip : clips)
    out.push_back(
        {{"start_s", clip.start_s}, {"end_s", clip.end_s}, {"cue_indices", clip.cue_indices}});
  if (out_path.empty())
    std::printf("%s\n", out.dump(2).c_str());
  else
    avseg::spit(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_train(const avseg::RunConfig& cfg, const fs::path& corpus_dir, const fs::path& out_dir,
              const std::string& stage, const std::string& init_path, bool resume) {
  const std::vector<avseg::Lecture> corpus = avseg::read_corpus(corpus_dir);
  avseg::require_valid(!corpus.empty(), "empty corpus");
  const avseg::TrainConfig& tc = cfg.train;

  const fs::path state_path = out_dir / ("train_state_" + stage + ".avls");
  const fs::path ckpt_path = out_dir / ("checkpoint_" + stage + ".avle");
  const fs::path trace_path = out_dir / ("loss_" + stage + ".csv");

  std::optional<avseg::TrainState> state;
  if (resume) {
    state.emplace(avseg::load_train_state(state_path));
    std::printf("resuming %s at epoch %u\n", stage.c_str(), state->epochs_done);
  } else if (!init_path.empty()) {
    state.emplace(avseg::load_params(init_path));
  } else {
    const avseg::ModelDims dims = avseg::model_dims(corpus.front().dims(), cfg.embed_dim);
    state.emplace(avseg::JointEmbeddingParams::seeded_init(dims, tc.rng_seed));
  }
  if (!resume) avseg::spit(trace_path, "epoch,mean_loss\n");

  const avseg::EpochCallback on_epoch = [&](int epoch, double mean_loss,
                                            const avseg::TrainState& s) {
    char row[64];
    std::snprintf(row, sizeof row, "%d,%.17g\n", epoch, mean_loss);
    avseg::spit(trace_path, avseg::slurp(trace_path) + row);
    avseg::save_params(s.params, ckpt_path);
    avseg::save_train_state(s, state_path);
    std::printf("epoch %d mean loss %.6f\n", epoch, mean_loss);
  };
  avseg::train_epochs(*state, corpus, tc, on_epoch);
  if (state->epochs_done == 0) {  // zero-epoch run still leaves a usable checkpoint
    avseg::save_params(state->params, ckpt_path);
    avseg::save_train_state(*state, state_path);
  }
  std::printf("checkpoint at %s\n", ckpt_path.string().c_str());
  return 0;
}

int cmd_embed(const avseg::RunConfig& cfg, const fs::path& corpus_dir, const fs::path& ckpt,
              const fs::path& out_dir, int jobs) {
  const avseg::JointEmbeddingParams params = avseg::load_params(ckpt);
  const std::vector<avseg::Lecture> corpus = avseg::read_corpus(corpus_dir);
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const avseg::LectureEmbeddings emb = avseg::embed_lecture(params, corpus[i], cfg.mask);
    avseg::save_embeddings(emb, out_dir / (corpus[i].lecture_id + ".avlz"));
  });
  std::printf("wrote %zu embedding dumps to %s\n", corpus.size(), out_dir.string().c_str());
  return 0;
}

struct SegmentOptions {
  std::string method = "twfinch";
  std::string k_source = "gt";
  std::string features = "auto";  // auto | learned | raw
  std::string phi = "both";       // both | clip | text (learned features)
  std::string raw_modalities = "v2d,v3d,ocr,text";
};

int cmd_segment(const avseg::RunConfig& cfg, const fs::path& corpus_dir, const fs::path& ckpt,
                const fs::path& out_dir, const SegmentOptions& opt, int jobs) {
  const bool is_twfinch = opt.method == "twfinch";
  avseg::require_valid(is_twfinch || opt.method == "naive" || opt.method == "kmeans" ||
                           opt.method == "cte",
                       "method must be twfinch | naive | kmeans | cte");
  const KSource ks = parse_k_source(opt.k_source);
  avseg::require_valid(
      is_twfinch || (ks.kind == KSource::Kind::gt || ks.kind == KSource::Kind::fixed),
      "auto k-sources need method=twfinch");

  std::string features = opt.features;
  if (features == "auto") features = ckpt.empty() ? "raw" : "learned";
  avseg::require_valid(features == "learned" || features == "raw",
                       "features must be auto | learned | raw");
  const bool needs_phi = opt.method != "naive";
  std::optional<avseg::JointEmbeddingParams> params;
  if (needs_phi && features == "learned") {
    avseg::require(!ckpt.empty(), avseg::Errc::missing_artifact,
                   "learned features need --checkpoint");
    params.emplace(avseg::load_params(ckpt));
  }
  avseg::require_valid(opt.phi == "both" || opt.phi == "clip" || opt.phi == "text",
                       "phi must be both | clip | text");
  const RawSelection raw_sel = parse_raw_modalities(opt.raw_modalities);

  const std::vector<avseg::Lecture> corpus = avseg::read_corpus(corpus_dir);
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const avseg::Lecture& lec = corpus[i];
    const double T = lec.total_duration_s;
    std::vector<double> taus(lec.clips.size());
    for (std::size_t c = 0; c < lec.clips.size(); ++c) taus[c] = lec.clips[c].midpoint_s();

    std::vector<Eigen::VectorXd> phis;
    if (needs_phi) {
      phis.resize(lec.clips.size());
      if (features == "learned") {
        const avseg::LectureEmbeddings emb = avseg::embed_lecture(*params, lec, cfg.mask);
        for (std::size_t c = 0; c < lec.clips.size(); ++c) {
          const auto row = static_cast<Eigen::Index>(c);
          if (opt.phi == "clip") {
            phis[c] = emb.f.row(row).transpose();
          } else if (opt.phi == "text") {
            phis[c] = emb.g.row(row).transpose();
          } else {
            phis[c].resize(emb.f.cols() + emb.g.cols());
            phis[c] << emb.f.row(row).transpose(), emb.g.row(row).transpose();
          }
        }
      } else {
        for (std::size_t c = 0; c < lec.clips.size(); ++c) phis[c] = raw_phi(lec.clips[c], raw_sel);
      }
    }

    int k = ks.fixed_k;
    if (ks.kind == KSource::Kind::gt) {
      avseg::require(lec.gt.has_value(), avseg::Errc::missing_artifact,
                     "k-source gt but no ground truth for " + lec.lecture_id);
      k = lec.gt->k;
    }

    avseg::SegmentationRecord rec;
    rec.lecture_id = lec.lecture_id;
    rec.method = opt.method;
    if (opt.method == "naive") {
      rec.seg = avseg::naive_equal_splits(taus, T, k);
    } else if (opt.method == "kmeans") {
      avseg::KMeansConfig kc = cfg.kmeans;
      kc.k = k;
      rec.seg = avseg::kmeans_segment(phis, kc);
    } else if (opt.method == "cte") {
      avseg::CteConfig cc = cfg.cte;
      cc.kmeans.k = k;
      rec.seg = avseg::cte_segment(phis, taus, T, cc);
    } else {
      const std::vector<avseg::ClipPoint> points = avseg::make_points(phis, taus);
      avseg::SegmentResult r;
      if (ks.kind == KSource::Kind::second_last) {
        r = avseg::auto_k(points, T, cfg.twfinch, avseg::AutoKLevel::second_last);
      } else if (ks.kind == KSource::Kind::third_last) {
        r = avseg::auto_k(points, T, cfg.twfinch, avseg::AutoKLevel::third_last);
      } else {
        r = avseg::segment_exact_k(points, T, k, cfg.twfinch);
      }
      if (r.warning)
        std::fprintf(stderr, "warning: %s not contiguous at alpha_max %.2f\n",
                     lec.lecture_id.c_str(), cfg.twfinch.alpha_max);
      rec.seg = r.seg;
      rec.alpha_used = r.alpha_used;
    }
    rec.boundaries_s = avseg::boundaries_from_segmentation(lec, rec.seg);
    avseg::write_segmentation(rec, out_dir / (lec.lecture_id + ".seg.json"));
  });
  std::printf("wrote %zu segmentations to %s\n", corpus.size(), out_dir.string().c_str());
  return 0;
}

int cmd_eval(const avseg::RunConfig& cfg, const fs::path& corpus_dir, const fs::path& pred_dir,
             const fs::path& out_dir, bool by_course, int jobs) {
  const std::vector<avseg::Lecture> corpus = avseg::read_corpus(corpus_dir);
  avseg::require_valid(!corpus.empty(), "empty corpus");
  std::vector<avseg::MetricReport> reports(corpus.size());
  std::vector<std::string> methods(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const avseg::Lecture& lec = corpus[i];
    avseg::require(lec.gt.has_value(), avseg::Errc::missing_artifact,
                   "no ground truth for " + lec.lecture_id);
    const avseg::SegmentationRecord pred =
        avseg::read_segmentation(pred_dir / (lec.lecture_id + ".seg.json"));
    avseg::require_valid(pred.seg.labels.size() == lec.clips.size(),
                         "prediction length mismatch for " + lec.lecture_id);
    reports[i] = avseg::evaluate(pred.seg, *lec.gt, lec, cfg.metrics.k_list);
    methods[i] = pred.method;
  });

  json per_lecture = json::array();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    json row = avseg::report_to_json(reports[i]);
    row["lecture_id"] = corpus[i].lecture_id;
    row["method"] = methods[i];
    per_lecture.push_back(std::move(row));
  }
  const avseg::MetricReport mean = avseg::mean_report(reports);

  std::vector<std::pair<std::string, avseg::MetricReport>> table_rows;
  json groups = json::object();
  if (by_course) {
    std::map<std::string, std::vector<avseg::MetricReport>> grouped;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      grouped[course_of(corpus[i].lecture_id)].push_back(reports[i]);
    for (const auto& [course, rs] : grouped) {
      const avseg::MetricReport gmean = avseg::mean_report(rs);
      groups[course] = avseg::report_to_json(gmean);
      table_rows.emplace_back(course, gmean);
    }
  }
  table_rows.emplace_back("mean", mean);

  json out;
  out["per_lecture"] = std::move(per_lecture);
  out["mean"] = avseg::report_to_json(mean);
  if (by_course) out["groups"] = groups;
  avseg::spit(out_dir / "eval.json", out.dump(2) + "\n");

  std::printf("%s", avseg::format_report_table(table_rows).c_str());
  return 0;
}

int cmd_retrieve(const avseg::RunConfig& cfg, const fs::path& corpus_dir, const fs::path& ckpt,
                 const fs::path& query_path, int top_k, const std::string& out_path) {
  const avseg::JointEmbeddingParams params = avseg::load_params(ckpt);
  json qj;
  try {
    qj = json::parse(avseg::slurp(query_path));
  } catch (const json::exception& e) {
    avseg::fail(avseg::Errc::validation, std::string("bad query JSON: ") + e.what());
  }
  const auto qvals = qj.get<std::vector<double>>();
  avseg::require(qvals.size() == params.dims().dtext, avseg::Errc::dim_mismatch,
                 "query length != text feature dim");

  const std::vector<avseg::Lecture> corpus = avseg::read_corpus(corpus_dir);
  std::vector<avseg::ClipEmbedding> clips;
  for (const auto& lec : corpus)
    for (const auto& rec : lec.clips) clips.push_back(avseg::embed_clip(params, rec, cfg.mask));

  avseg::ClipFeatureRecord qrec;
  qrec.text.assign(qvals.begin(), qvals.end());
  // dummy slots so the record passes dim checks; only text feeds the query tower
  qrec.ocr.assign(params.dims().docr, 0.0f);
  qrec.v2d.assign(params.dims().d2d, 0.0f);
  qrec.v3d.assign(params.dims().d3d, 0.0f);
  const avseg::TextEmbedding q = avseg::embed_text(params, qrec);

  const std::vector<avseg::RetrievalHit> hits = avseg::retrieve(q.v, clips, top_k);
  json out = json::array();
  for (std::size_t r = 0; r < hits.size(); ++r) {
    std::printf("%2zu  %-16s clip %4d  score %+.6f\n", r + 1, hits[r].lecture_id.c_str(),
                hits[r].clip_index, hits[r].score);
    out.push_back({{"rank", r + 1},
                   {"lecture_id", hits[r].lecture_id},
                   {"clip_index", hits[r].clip_index},
                   {"score", hits[r].score}});
  }
  if (!out_path.empty()) avseg::spit(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_report(const fs::path& eval_path, const std::string& out_path) {
  json j;
  try {
    j = json::parse(avseg::slurp(eval_path));
  } catch (const json::exception& e) {
    avseg::fail(avseg::Errc::validation, std::string("bad eval JSON: ") + e.what());
  }
  std::vector<std::pair<std::string, avseg::MetricReport>> rows;
  if (j.contains("groups"))
    for (const auto& [course, rep] : j.at("groups").items())
      rows.emplace_back(course, avseg::report_from_json(rep));
  rows.emplace_back("mean", avseg::report_from_json(j.at("mean")));
  const std::string table = avseg::format_report_table(rows);
  if (out_path.empty())
    std::printf("%s", table.c_str());
  else
    avseg::spit(out_path, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audio-visual lecture segmentation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  app.add_option("--config", config_path, "run configuration JSON")->envname("AVSEG_CONFIG");
  app.add_option("--jobs", jobs, "worker threads for per-lecture stages");
  app.add_option("--seed", seed, "override the command's RNG seed");
  app.add_option("--out", out_dir, "output directory (default from config)");

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  auto* clip = app.add_subcommand("clipify", "group subtitle cues into clips");
  std::string cues_path, clip_out;
  double clip_min = -1.0, clip_max = -1.0;
  clip->add_option("--cues", cues_path, "subtitle cue JSON file")->required();
  clip->add_option("--min", clip_min, "minimum clip seconds (default from config)");
  clip->add_option("--max", clip_max, "maximum clip seconds (default from config)");
  clip->add_option("--clips-out", clip_out, "output JSON path (default stdout)");

  auto* train = app.add_subcommand("train", "train the joint embedding");
  std::string corpus_dir, stage = "main", init_path, checkpoint_path;
  bool resume = false;
  train->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  train->add_option("--stage", stage, "tag for checkpoint/trace filenames");
  train->add_option("--init", init_path, "start from an existing checkpoint");
  train->add_flag("--resume", resume, "continue from the saved training state");

  auto* embed = app.add_subcommand("embed", "dump per-lecture embeddings");
  embed->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  embed->add_option("--checkpoint", checkpoint_path, "model checkpoint (default from config)");

  SegmentOptions seg_opt;
  auto* segment = app.add_subcommand("segment", "segment lectures with 1-NN clustering");
  segment->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  segment->add_option("--checkpoint", checkpoint_path, "model checkpoint (default from config)");
  segment->add_option("--k-source", seg_opt.k_source, "gt | second_last | third_last | fixed:K");
  segment->add_option("--features", seg_opt.features, "auto | learned | raw");
  segment->add_option("--phi", seg_opt.phi, "learned feature slice: both | clip | text");
  segment->add_option("--raw-modalities", seg_opt.raw_modalities,
                      "comma list among v2d,v3d,ocr,text for --features raw");

  std::string baseline_method = "naive";
  auto* baseline = app.add_subcommand("baseline", "segment lectures with a baseline method");
  baseline->add_option("--method", baseline_method, "naive | kmeans | cte")->required();
  baseline->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  baseline->add_option("--checkpoint", checkpoint_path, "model checkpoint (default from config)");
  baseline->add_option("--k-source", seg_opt.k_source, "gt | fixed:K");
  baseline->add_option("--features", seg_opt.features, "auto | learned | raw");
  baseline->add_option("--phi", seg_opt.phi, "learned feature slice: both | clip | text");
  baseline->add_option("--raw-modalities", seg_opt.raw_modalities,
                       "comma list among v2d,v3d,ocr,text for --features raw");

  auto* eval = app.add_subcommand("eval", "score segmentations against ground truth");
  std::string pred_dir;
  bool by_course = false;
  eval->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  eval->add_option("--pred", pred_dir, "directory of *.seg.json predictions")->required();
  eval->add_flag("--by-course", by_course, "also aggregate per course prefix");

  auto* retrieve = app.add_subcommand("retrieve", "rank clips for a text query vector");
  std::string query_path, retrieve_out;
  int top_k = 10;
  retrieve->add_option("--corpus", corpus_dir, "corpus directory (default from config)");
  retrieve->add_option("--checkpoint", checkpoint_path, "model checkpoint (default from config)");
  retrieve->add_option("--query", query_path, "JSON array, one raw text feature vector")
      ->required();
  retrieve->add_option("--top-k", top_k, "number of results");
  retrieve->add_option("--results-out", retrieve_out, "also write ranked list JSON here");

  auto* report = app.add_subcommand("report", "format a stored eval.json as a table");
  std::string eval_path, table_out;
  report->add_option("--eval", eval_path, "eval.json produced by the eval command")->required();
  report->add_option("--table-out", table_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    avseg::RunConfig cfg;
    if (!config_path.empty()) cfg = avseg::load_run_config(config_path);
    if (seg_opt.features == "auto" && !cfg.paths.checkpoint.empty() && checkpoint_path.empty())
      checkpoint_path = cfg.paths.checkpoint;
    if (corpus_dir.empty()) corpus_dir = cfg.paths.corpus_dir;
    if (checkpoint_path.empty()) checkpoint_path = cfg.paths.checkpoint;
    if (out_dir.empty()) out_dir = cfg.paths.output_dir;
    if (clip_min < 0.0) clip_min = cfg.clip.min_len_s;
    if (clip_max < 0.0) clip_max = cfg.clip.max_len_s;
    if (seed) {
      cfg.synth.rng_seed = *seed;
      cfg.train.rng_seed = *seed;
      cfg.kmeans.rng_seed = *seed;
      cfg.cte.kmeans.rng_seed = *seed;
    }

    if (*synth) return cmd_synth(cfg, out_dir);
    if (*clip) return cmd_clipify(cues_path, clip_min, clip_max, clip_out);
    avseg::require_valid(!corpus_dir.empty() || *report, "no corpus directory given");
    if (*train) return cmd_train(cfg, corpus_dir, out_dir, stage, init_path, resume);
    if (*embed) return cmd_embed(cfg, corpus_dir, checkpoint_path, out_dir, jobs);
    if (*segment) {
      seg_opt.method = "twfinch";
      return cmd_segment(cfg, corpus_dir, checkpoint_path, out_dir, seg_opt, jobs);
    }
    if (*baseline) {
      seg_opt.method = baseline_method;
      return cmd_segment(cfg, corpus_dir, checkpoint_path, out_dir, seg_opt, jobs);
    }
    if (*eval) return cmd_eval(cfg, corpus_dir, pred_dir, out_dir, by_course, jobs);
    if (*retrieve)
      return cmd_retrieve(cfg, corpus_dir, checkpoint_path, query_path, top_k, retrieve_out);
    if (*report) return cmd_report(eval_path, table_out);
    return 1;
  } catch (const avseg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
