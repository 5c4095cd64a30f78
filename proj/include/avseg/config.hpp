#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "avseg/baselines.hpp"
#include "avseg/embedder.hpp"
#include "avseg/errors.hpp"
#include "avseg/io.hpp"
#include "avseg/metrics.hpp"
#include "avseg/synthetic.hpp"
#include "avseg/twfinch.hpp"
#include "json.hpp"

namespace avseg {

struct RunPaths {
  std::string corpus_dir;
  std::string checkpoint;
  std::string output_dir = "out";
};

struct ClipifyParams {
  double min_len_s = 10.0;
  double max_len_s = 15.0;
};

struct MetricParams {
  std::vector<int> k_list = {30};
};

struct RunConfig {
  int schema_version = 1;
  RunPaths paths;
  SynthConfig synth;
  ClipifyParams clip;
  TrainConfig train;
  std::uint32_t embed_dim = 4096;
  ModalityMask mask;
  TwfinchConfig twfinch;
  KMeansConfig kmeans;
  CteConfig cte;
  MetricParams metrics;
};

namespace cfgjson {

using nlohmann::json;

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline json dims_to_json(const FeatureDims& d) {
  return {{"d2d", d.d2d}, {"d3d", d.d3d}, {"docr", d.docr}, {"dtext", d.dtext}};
}

inline void dims_from_json(const json& j, FeatureDims& d) {
  get_if(j, "d2d", d.d2d);
  get_if(j, "d3d", d.d3d);
  get_if(j, "docr", d.docr);
  get_if(j, "dtext", d.dtext);
}

inline json mask_to_json(const ModalityMask& m) {
  return {{"v2d", m.v2d}, {"v3d", m.v3d}, {"ocr", m.ocr}};
}

inline void mask_from_json(const json& j, ModalityMask& m) {
  get_if(j, "v2d", m.v2d);
  get_if(j, "v3d", m.v3d);
  get_if(j, "ocr", m.ocr);
}

inline json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["paths"] = {{"corpus_dir", c.paths.corpus_dir},
                {"checkpoint", c.paths.checkpoint},
                {"output_dir", c.paths.output_dir}};
  j["synth"] = {{"n_lectures", c.synth.n_lectures},
                {"k_min", c.synth.k_min},
                {"k_max", c.synth.k_max},
                {"clips_per_lecture", c.synth.clips_per_lecture},
                {"clip_len_s", c.synth.clip_len_s},
                {"noise_sigma", c.synth.noise_sigma},
                {"dirichlet_concentration", c.synth.dirichlet_concentration},
                {"dims", dims_to_json(c.synth.dims)},
                {"signal_v2d", to_string(c.synth.signal_v2d)},
                {"signal_v3d", to_string(c.synth.signal_v3d)},
                {"signal_ocr", to_string(c.synth.signal_ocr)},
                {"signal_text", to_string(c.synth.signal_text)},
                {"cross_modal_map_seed", c.synth.cross_modal_map_seed},
                {"rng_seed", c.synth.rng_seed}};
  j["clip"] = {{"min_len_s", c.clip.min_len_s}, {"max_len_s", c.clip.max_len_s}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"margin", c.train.margin},
                {"lr", c.train.lr},
                {"lr_decay", c.train.lr_decay},
                {"epochs", c.train.epochs},
                {"adam_beta1", c.train.adam_beta1},
                {"adam_beta2", c.train.adam_beta2},
                {"adam_eps", c.train.adam_eps},
                {"intra_lecture_fraction", c.train.intra_lecture_fraction},
                {"rng_seed", c.train.rng_seed}};
  j["embed_dim"] = c.embed_dim;
  j["modality_mask"] = mask_to_json(c.mask);
  j["twfinch"] = {{"alpha_init", c.twfinch.alpha_init},
                  {"alpha_step", c.twfinch.alpha_step},
                  {"alpha_max", c.twfinch.alpha_max},
                  {"require_contiguous", c.twfinch.require_contiguous},
                  {"shared_neighbor", c.twfinch.shared_neighbor}};
  j["kmeans"] = {{"n_restarts", c.kmeans.n_restarts},
                 {"max_iters", c.kmeans.max_iters},
                 {"tol", c.kmeans.tol},
                 {"rng_seed", c.kmeans.rng_seed}};
  j["cte"] = {{"time_weight", c.cte.time_weight}};
  j["metrics"] = {{"k_list", c.metrics.k_list}};
  return j;
}

inline RunConfig from_json(const json& j) {
  RunConfig c;
  require_valid(j.contains("schema_version"), "config missing schema_version");
  c.schema_version = j.at("schema_version").get<int>();
  require_valid(c.schema_version == 1,
                "unsupported config schema_version " + std::to_string(c.schema_version));
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    get_if(p, "corpus_dir", c.paths.corpus_dir);
    get_if(p, "checkpoint", c.paths.checkpoint);
    get_if(p, "output_dir", c.paths.output_dir);
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    get_if(s, "n_lectures", c.synth.n_lectures);
    get_if(s, "k_min", c.synth.k_min);
    get_if(s, "k_max", c.synth.k_max);
    get_if(s, "clips_per_lecture", c.synth.clips_per_lecture);
    get_if(s, "clip_len_s", c.synth.clip_len_s);
    get_if(s, "noise_sigma", c.synth.noise_sigma);
    get_if(s, "dirichlet_concentration", c.synth.dirichlet_concentration);
    if (s.contains("dims")) dims_from_json(s.at("dims"), c.synth.dims);
    if (s.contains("signal_v2d")) c.synth.signal_v2d = topic_signal_from_string(s.at("signal_v2d"));
    if (s.contains("signal_v3d")) c.synth.signal_v3d = topic_signal_from_string(s.at("signal_v3d"));
    if (s.contains("signal_ocr")) c.synth.signal_ocr = topic_signal_from_string(s.at("signal_ocr"));
    if (s.contains("signal_text"))
      c.synth.signal_text = topic_signal_from_string(s.at("signal_text"));
    get_if(s, "cross_modal_map_seed", c.synth.cross_modal_map_seed);
    get_if(s, "rng_seed", c.synth.rng_seed);
  }
  if (j.contains("clip")) {
    get_if(j.at("clip"), "min_len_s", c.clip.min_len_s);
    get_if(j.at("clip"), "max_len_s", c.clip.max_len_s);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    get_if(t, "batch_size", c.train.batch_size);
    get_if(t, "margin", c.train.margin);
    get_if(t, "lr", c.train.lr);
    get_if(t, "lr_decay", c.train.lr_decay);
    get_if(t, "epochs", c.train.epochs);
    get_if(t, "adam_beta1", c.train.adam_beta1);
    get_if(t, "adam_beta2", c.train.adam_beta2);
    get_if(t, "adam_eps", c.train.adam_eps);
    get_if(t, "intra_lecture_fraction", c.train.intra_lecture_fraction);
    get_if(t, "rng_seed", c.train.rng_seed);
  }
  get_if(j, "embed_dim", c.embed_dim);
  if (j.contains("modality_mask")) mask_from_json(j.at("modality_mask"), c.mask);
  if (j.contains("twfinch")) {
    const json& t = j.at("twfinch");
    get_if(t, "alpha_init", c.twfinch.alpha_init);
    get_if(t, "alpha_step", c.twfinch.alpha_step);
    get_if(t, "alpha_max", c.twfinch.alpha_max);
    get_if(t, "require_contiguous", c.twfinch.require_contiguous);
    get_if(t, "shared_neighbor", c.twfinch.shared_neighbor);
  }
  if (j.contains("kmeans")) {
    const json& k = j.at("kmeans");
    get_if(k, "n_restarts", c.kmeans.n_restarts);
    get_if(k, "max_iters", c.kmeans.max_iters);
    get_if(k, "tol", c.kmeans.tol);
    get_if(k, "rng_seed", c.kmeans.rng_seed);
  }
  if (j.contains("cte")) get_if(j.at("cte"), "time_weight", c.cte.time_weight);
  if (j.contains("metrics")) get_if(j.at("metrics"), "k_list", c.metrics.k_list);
  c.train.mask = c.mask;
  c.cte.kmeans = c.kmeans;
  return c;
}

}  // namespace cfgjson

inline RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::validation, "bad config JSON " + path.string() + ": " + e.what());
  }
  return cfgjson::from_json(j);
}

inline void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  spit(path, cfgjson::to_json(cfg).dump(2) + "\n");
}

// ---- metric report JSON ----

inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json bs = nlohmann::json::object();
  for (const auto& [k, v] : r.bs_at) bs[std::to_string(k)] = v;
  return {{"nmi", r.nmi}, {"mof", r.mof}, {"iou", r.iou}, {"f1", r.f1}, {"bs_at", bs}};
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.nmi = j.at("nmi").get<double>();
  r.mof = j.at("mof").get<double>();
  r.iou = j.at("iou").get<double>();
  r.f1 = j.at("f1").get<double>();
  for (const auto& [k, v] : j.at("bs_at").items()) r.bs_at[std::stoi(k)] = v.get<double>();
  return r;
}

}  // namespace avseg
