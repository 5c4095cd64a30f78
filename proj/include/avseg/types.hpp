#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "avseg/errors.hpp"

namespace avseg {

struct FeatureDims {
  std::uint32_t d2d = 2048;
  std::uint32_t d3d = 2048;
  std::uint32_t docr = 768;
  std::uint32_t dtext = 768;

  bool operator==(const FeatureDims&) const = default;
};

// One clip of a lecture: its time interval plus the four per-modality
// feature vectors produced by (frozen, external) extractors.
struct ClipFeatureRecord {
  std::string lecture_id;
  int clip_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<float> v2d;
  std::vector<float> v3d;
  std::vector<float> ocr;
  std::vector<float> text;

  FeatureDims dims() const {
    return {static_cast<std::uint32_t>(v2d.size()), static_cast<std::uint32_t>(v3d.size()),
            static_cast<std::uint32_t>(ocr.size()), static_cast<std::uint32_t>(text.size())};
  }

  double midpoint_s() const { return 0.5 * (start_s + end_s); }
};

// Per-clip cluster labels. Canonical form: labels are 0..k-1 in order of
// first occurrence; `contiguous` is true iff every label occupies one
// unbroken run of clip indices.
struct Segmentation {
  std::vector<int> labels;
  int k = 0;
  bool contiguous = false;

  static Segmentation from_labels(std::vector<int> raw) {
    Segmentation seg;
    seg.labels.resize(raw.size());
    std::unordered_map<int, int> remap;
    remap.reserve(raw.size());
    int next = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto [it, inserted] = remap.try_emplace(raw[i], next);
      if (inserted) ++next;
      seg.labels[i] = it->second;
    }
    seg.k = next;
    seg.contiguous = compute_contiguous(seg.labels);
    return seg;
  }

  static bool compute_contiguous(const std::vector<int>& labels) {
    // Canonical labels are contiguous iff each label change introduces a
    // label never seen before.
    int max_seen = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0 && labels[i] == labels[i - 1]) continue;
      if (labels[i] <= max_seen) return false;
      max_seen = labels[i];
    }
    return true;
  }
};

struct Lecture {
  std::string lecture_id;
  double total_duration_s = 0.0;
  std::vector<ClipFeatureRecord> clips;
  std::optional<Segmentation> gt;

  std::size_t n_clips() const { return clips.size(); }
  FeatureDims dims() const {
    require_valid(!clips.empty(), "lecture has no clips");
    return clips.front().dims();
  }
};

struct SubtitleCue {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
};

inline bool all_finite(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

inline void validate_cues(const std::vector<SubtitleCue>& cues) {
  require_valid(!cues.empty(), "no cues");
  for (std::size_t i = 0; i < cues.size(); ++i) {
    require_valid(cues[i].end_s > cues[i].start_s, "cue has non-positive duration");
    if (i > 0)
      require_valid(cues[i].start_s >= cues[i - 1].end_s, "cues overlap or are out of order");
  }
}

inline void validate_lecture(const Lecture& lec) {
  require_valid(!lec.lecture_id.empty(), "lecture_id must not be empty");
  require_valid(!lec.clips.empty(), "lecture has no clips");
  const FeatureDims dims = lec.clips.front().dims();
  double max_end = 0.0;
  for (std::size_t i = 0; i < lec.clips.size(); ++i) {
    const auto& c = lec.clips[i];
    require_valid(c.end_s > c.start_s, "clip interval empty: " + lec.lecture_id);
    require_valid(c.clip_index == static_cast<int>(i),
                  "clip_index not strictly increasing from 0: " + lec.lecture_id);
    if (i > 0)
      require_valid(c.start_s >= lec.clips[i - 1].end_s,
                    "clip intervals overlap: " + lec.lecture_id);
    require(c.dims() == dims, Errc::dim_mismatch,
            "clip feature dims differ within lecture: " + lec.lecture_id);
    require(all_finite(c.v2d) && all_finite(c.v3d) && all_finite(c.ocr) && all_finite(c.text),
            Errc::numeric, "non-finite feature entry: " + lec.lecture_id);
    max_end = std::max(max_end, c.end_s);
  }
  require_valid(lec.total_duration_s >= max_end, "total_duration_s below last clip end");
  if (lec.gt) {
    require_valid(lec.gt->labels.size() == lec.clips.size(),
                  "ground truth labels one per clip: " + lec.lecture_id);
    require_valid(lec.gt->contiguous, "ground truth must be temporally contiguous");
  }
}

// Start times of each non-initial segment, from per-clip labels.
inline std::vector<double> boundaries_from_segmentation(const Lecture& lec,
                                                        const Segmentation& seg) {
  require_valid(seg.labels.size() == lec.clips.size(), "segmentation length != clip count");
  std::vector<double> bounds;
  for (std::size_t i = 1; i < seg.labels.size(); ++i)
    if (seg.labels[i] != seg.labels[i - 1]) bounds.push_back(lec.clips[i].start_s);
  return bounds;
}

// Reconstruct per-clip labels from internal boundary timestamps: a clip
// belongs to segment #(boundaries at or before its midpoint).
inline Segmentation segmentation_from_boundaries(const Lecture& lec,
                                                 const std::vector<double>& boundaries_s) {
  std::vector<int> labels(lec.clips.size());
  for (std::size_t i = 0; i < lec.clips.size(); ++i) {
    const double mid = lec.clips[i].midpoint_s();
    labels[i] = static_cast<int>(
        std::upper_bound(boundaries_s.begin(), boundaries_s.end(), mid) - boundaries_s.begin());
  }
  return Segmentation::from_labels(std::move(labels));
}

}  // namespace avseg
