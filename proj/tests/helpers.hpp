#pragma once

// Shared builders and reference oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "avseg/rng.hpp"
#include "avseg/types.hpp"

namespace testutil {

inline std::vector<float> unit_feature(avseg::Rng& rng, std::size_t dim, double noise) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.gaussian();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  if (noise > 0.0) {
    norm2 = 0.0;
    for (auto& x : v) {
      x += noise * rng.gaussian();
      norm2 += x * x;
    }
    const double inv2 = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv2;
  }
  return {v.begin(), v.end()};
}

// Lecture whose clips tile [0, n*clip_len) with features drawn around one
// topic vector per label; noise = 0 makes clips of a segment identical.
inline avseg::Lecture grid_lecture(const std::string& id, const std::vector<int>& labels,
                                   double clip_len, const avseg::FeatureDims& dims,
                                   std::uint64_t seed, double noise = 0.0) {
  avseg::Lecture lec;
  lec.lecture_id = id;
  lec.total_duration_s = clip_len * static_cast<double>(labels.size());
  avseg::Rng rng(seed);

  const int k = 1 + *std::max_element(labels.begin(), labels.end());
  std::vector<std::vector<std::vector<float>>> topics(static_cast<std::size_t>(k));
  for (auto& per_modality : topics) {
    per_modality.push_back(unit_feature(rng, dims.d2d, 0.0));
    per_modality.push_back(unit_feature(rng, dims.d3d, 0.0));
    per_modality.push_back(unit_feature(rng, dims.docr, 0.0));
    per_modality.push_back(unit_feature(rng, dims.dtext, 0.0));
  }

  auto jitter = [&](const std::vector<float>& topic) {
    if (noise <= 0.0) return topic;
    std::vector<double> v(topic.begin(), topic.end());
    double norm2 = 0.0;
    for (auto& x : v) {
      x += noise * rng.gaussian();
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] * inv);
    return out;
  };

  for (std::size_t i = 0; i < labels.size(); ++i) {
    avseg::ClipFeatureRecord rec;
    rec.lecture_id = id;
    rec.clip_index = static_cast<int>(i);
    rec.start_s = clip_len * static_cast<double>(i);
    rec.end_s = clip_len * static_cast<double>(i + 1);
    const auto& t = topics[static_cast<std::size_t>(labels[i])];
    rec.v2d = jitter(t[0]);
    rec.v3d = jitter(t[1]);
    rec.ocr = jitter(t[2]);
    rec.text = jitter(t[3]);
    lec.clips.push_back(std::move(rec));
  }
  lec.gt = avseg::Segmentation::from_labels(labels);
  avseg::validate_lecture(lec);
  return lec;
}

struct OverlapPair {
  double iou = 0.0;
  double f1 = 0.0;
};

struct OverlapOracleResult {
  double best_total = 0.0;            // maximum matched overlap over all mappings
  std::vector<OverlapPair> candidates;  // metrics of every mapping attaining it
};

// Reference for matched-overlap metrics: enumerate every injective mapping
// from predicted to ground-truth clusters (skips allowed), keep the mappings
// with maximum total overlap, and compute the GT-averaged IoU/F1 for each.
inline OverlapOracleResult brute_force_overlap(const std::vector<int>& pred,
                                               const std::vector<int>& gt) {
  int kp = 0, kg = 0;
  for (int x : pred) kp = std::max(kp, x + 1);
  for (int x : gt) kg = std::max(kg, x + 1);
  std::vector<std::vector<double>> table(static_cast<std::size_t>(kp),
                                         std::vector<double>(static_cast<std::size_t>(kg), 0.0));
  std::vector<double> psize(static_cast<std::size_t>(kp), 0.0);
  std::vector<double> gsize(static_cast<std::size_t>(kg), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    table[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(gt[i])] += 1.0;
    psize[static_cast<std::size_t>(pred[i])] += 1.0;
    gsize[static_cast<std::size_t>(gt[i])] += 1.0;
  }

  OverlapOracleResult res;
  std::vector<int> assign(static_cast<std::size_t>(kp), -1);
  std::vector<char> used(static_cast<std::size_t>(kg), 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == kp) {
      double total = 0.0;
      for (int p = 0; p < kp; ++p)
        if (assign[static_cast<std::size_t>(p)] >= 0)
          total += table[static_cast<std::size_t>(p)]
                        [static_cast<std::size_t>(assign[static_cast<std::size_t>(p)])];
      if (total > res.best_total) {
        res.best_total = total;
        res.candidates.clear();
      }
      if (total == res.best_total) {
        OverlapPair m;
        for (int j = 0; j < kg; ++j) {
          double inter = 0.0, ps = 0.0;
          for (int p = 0; p < kp; ++p)
            if (assign[static_cast<std::size_t>(p)] == j) {
              inter = table[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
              ps = psize[static_cast<std::size_t>(p)];
            }
          const double gs = gsize[static_cast<std::size_t>(j)];
          const double uni = ps + gs - inter;
          m.iou += (uni > 0.0 ? inter / uni : 0.0) / kg;
          m.f1 += (ps + gs > 0.0 ? 2.0 * inter / (ps + gs) : 0.0) / kg;
        }
        res.candidates.push_back(m);
      }
      return;
    }
    assign[static_cast<std::size_t>(i)] = -1;
    rec(i + 1);
    for (int j = 0; j < kg; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      used[static_cast<std::size_t>(j)] = 1;
      assign[static_cast<std::size_t>(i)] = j;
      rec(i + 1);
      used[static_cast<std::size_t>(j)] = 0;
    }
    assign[static_cast<std::size_t>(i)] = -1;
  };
  rec(0);
  return res;
}

// All label arrays of the given length in canonical first-occurrence order
// (label i appears only after 0..i-1) with at most max_labels distinct values.
inline std::vector<std::vector<int>> canonical_labelings(int length, int max_labels) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(length), 0);
  std::function<void(int, int)> rec = [&](int pos, int next) {
    if (pos == length) {
      out.push_back(cur);
      return;
    }
    const int top = std::min(next, max_labels - 1);
    for (int v = 0; v <= top; ++v) {
      cur[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, std::max(next, v + 1));
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace testutil
