#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/rng.hpp"
#include "avseg/types.hpp"

namespace avseg {

// How much topic signal a modality carries. `shared` means one topic vector
// for all segments (only noise varies). The pair modes collapse adjacent
// segment pairs so that a modality resolves only half the boundaries:
// even_pairs merges segments {0,1},{2,3},..., odd_pairs merges {1,2},{3,4},...
// Giving visual modalities one mode and text the other makes every boundary
// visible to exactly one tower, so only a joint representation resolves all.
enum class TopicSignal { full, shared, even_pairs, odd_pairs };

inline const char* to_string(TopicSignal s) {
  switch (s) {
    case TopicSignal::full: return "full";
    case TopicSignal::shared: return "shared";
    case TopicSignal::even_pairs: return "even_pairs";
    case TopicSignal::odd_pairs: return "odd_pairs";
  }
  return "full";
}

inline TopicSignal topic_signal_from_string(const std::string& s) {
  if (s == "full") return TopicSignal::full;
  if (s == "shared") return TopicSignal::shared;
  if (s == "even_pairs") return TopicSignal::even_pairs;
  if (s == "odd_pairs") return TopicSignal::odd_pairs;
  fail(Errc::validation, "unknown topic signal '" + s + "'");
}

inline int collapse_topic(TopicSignal s, int k) {
  switch (s) {
    case TopicSignal::full: return k;
    case TopicSignal::shared: return 0;
    case TopicSignal::even_pairs: return (k / 2) * 2;
    case TopicSignal::odd_pairs: return k == 0 ? 0 : ((k - 1) / 2) * 2 + 1;
  }
  return k;
}

struct SynthConfig {
  int n_lectures = 10;
  int k_min = 3;
  int k_max = 10;
  int clips_per_lecture = 200;
  double clip_len_s = 12.0;
  double noise_sigma = 0.1;
  double dirichlet_concentration = 5.0;
  FeatureDims dims{32, 32, 16, 16};
  TopicSignal signal_v2d = TopicSignal::full;
  TopicSignal signal_v3d = TopicSignal::full;
  TopicSignal signal_ocr = TopicSignal::full;
  TopicSignal signal_text = TopicSignal::full;
  std::uint64_t cross_modal_map_seed = 7;
  std::uint64_t rng_seed = 1;
};

inline void validate_synth_config(const SynthConfig& cfg) {
  require_valid(cfg.n_lectures >= 1, "n_lectures must be >= 1");
  require_valid(cfg.k_min >= 1 && cfg.k_max >= cfg.k_min, "need 1 <= k_min <= k_max");
  require_valid(cfg.clips_per_lecture >= cfg.k_max, "clips_per_lecture must be >= k_max");
  require_valid(cfg.clip_len_s > 0.0, "clip_len_s must be positive");
  require_valid(cfg.noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require_valid(cfg.dirichlet_concentration > 0.0, "dirichlet_concentration must be positive");
  require_valid(cfg.dims.d2d >= 1 && cfg.dims.d3d >= 1 && cfg.dims.docr >= 1 &&
                    cfg.dims.dtext >= 1,
                "feature dims must be >= 1");
}

namespace detail {

inline constexpr int kLatentDim = 32;

// Largest-remainder split of n_clips into K nonempty counts proportional to
// fractions.
inline std::vector<int> proportional_counts(const std::vector<double>& fractions, int n_clips) {
  const int k = static_cast<int>(fractions.size());
  std::vector<int> counts(k);
  std::vector<std::pair<double, int>> rema(k);
  int assigned = 0;
  for (int i = 0; i < k; ++i) {
    const double exact = fractions[i] * n_clips;
    counts[i] = static_cast<int>(exact);
    rema[i] = {exact - counts[i], i};
    assigned += counts[i];
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n_clips - assigned; ++r) ++counts[rema[r % k].second];
  for (int i = 0; i < k; ++i) {
    while (counts[i] == 0) {
      const int donor = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[donor];
      ++counts[i];
    }
  }
  return counts;
}

inline Eigen::VectorXd unit_gaussian(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
  const double norm = v.norm();
  require(norm > 0.0, Errc::numeric, "degenerate topic draw");
  return v / norm;
}

inline std::vector<float> noisy_unit_f32(const Eigen::VectorXd& topic, double sigma, Rng& rng) {
  Eigen::VectorXd v = topic;
  for (int i = 0; i < v.size(); ++i) v[i] += sigma * rng.gaussian();
  const double norm = v.norm();
  require(norm > 0.0, Errc::numeric, "noise annihilated feature vector");
  v /= norm;
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return out;
}

}  // namespace detail

inline std::vector<Lecture> generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);

  // One fixed random linear map per modality from a shared latent topic
  // space, so topics are tied across modalities and alignment is learnable.
  const std::uint32_t mod_dims[4] = {cfg.dims.d2d, cfg.dims.d3d, cfg.dims.docr, cfg.dims.dtext};
  const TopicSignal mod_signal[4] = {cfg.signal_v2d, cfg.signal_v3d, cfg.signal_ocr,
                                     cfg.signal_text};
  Eigen::MatrixXd maps[4];
  for (int m = 0; m < 4; ++m) {
    Rng rng(derive_seed(cfg.cross_modal_map_seed, static_cast<std::uint64_t>(m)));
    maps[m].resize(mod_dims[m], detail::kLatentDim);
    for (int r = 0; r < maps[m].rows(); ++r)
      for (int c = 0; c < maps[m].cols(); ++c)
        maps[m](r, c) = rng.gaussian() / std::sqrt(double(detail::kLatentDim));
  }

  std::vector<Lecture> lectures(static_cast<std::size_t>(cfg.n_lectures));
  for (int l = 0; l < cfg.n_lectures; ++l) {
    Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(l)));
    Lecture& lec = lectures[static_cast<std::size_t>(l)];
    char id[32];
    std::snprintf(id, sizeof id, "c%02d_l%04d", l / 10, l);
    lec.lecture_id = id;
    lec.total_duration_s = cfg.clips_per_lecture * cfg.clip_len_s;

    const int k = cfg.k_min + static_cast<int>(rng.uniform_int(
                                  static_cast<std::uint64_t>(cfg.k_max - cfg.k_min + 1)));
    const std::vector<double> fractions = rng.dirichlet(k, cfg.dirichlet_concentration);
    const std::vector<int> seg_clips = detail::proportional_counts(fractions, cfg.clips_per_lecture);

    std::vector<Eigen::VectorXd> latent(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) latent[static_cast<std::size_t>(s)] =
        detail::unit_gaussian(rng, detail::kLatentDim);

    // Per-modality, per-segment unit topic vectors in feature space.
    std::vector<Eigen::VectorXd> topics[4];
    for (int m = 0; m < 4; ++m) {
      topics[m].resize(static_cast<std::size_t>(k));
      for (int s = 0; s < k; ++s) {
        Eigen::VectorXd t =
            maps[m] * latent[static_cast<std::size_t>(collapse_topic(mod_signal[m], s))];
        const double norm = t.norm();
        require(norm > 0.0, Errc::numeric, "degenerate projected topic");
        topics[m][static_cast<std::size_t>(s)] = t / norm;
      }
    }

    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(cfg.clips_per_lecture));
    lec.clips.resize(static_cast<std::size_t>(cfg.clips_per_lecture));
    int clip = 0;
    for (int s = 0; s < k; ++s) {
      for (int j = 0; j < seg_clips[static_cast<std::size_t>(s)]; ++j, ++clip) {
        auto& c = lec.clips[static_cast<std::size_t>(clip)];
        c.lecture_id = lec.lecture_id;
        c.clip_index = clip;
        c.start_s = clip * cfg.clip_len_s;
        c.end_s = (clip + 1) * cfg.clip_len_s;
        c.v2d = detail::noisy_unit_f32(topics[0][static_cast<std::size_t>(s)], cfg.noise_sigma, rng);
        c.v3d = detail::noisy_unit_f32(topics[1][static_cast<std::size_t>(s)], cfg.noise_sigma, rng);
        c.ocr = detail::noisy_unit_f32(topics[2][static_cast<std::size_t>(s)], cfg.noise_sigma, rng);
        c.text = detail::noisy_unit_f32(topics[3][static_cast<std::size_t>(s)], cfg.noise_sigma, rng);
        labels.push_back(s);
      }
    }
    lec.gt = Segmentation::from_labels(std::move(labels));
    validate_lecture(lec);
  }
  return lectures;
}

}  // namespace avseg
