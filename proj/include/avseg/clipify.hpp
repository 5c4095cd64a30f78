#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/types.hpp"

namespace avseg {

struct ClipSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<std::size_t> cue_indices;
};

// Group consecutive subtitle cues into clips of roughly min_len..max_len
// seconds without ever splitting a cue. A clip closes as soon as it reaches
// min_len, so it can overshoot max_len only through one long cue. A trailing
// run of cues that never reaches min_len is merged into the previous clip.
// Clip intervals tile [first cue start, last cue end]: any gap between cues
// belongs to the earlier clip.
inline std::vector<ClipSpan> clipify(const std::vector<SubtitleCue>& cues, double min_len,
                                     double max_len) {
  validate_cues(cues);
  require_valid(min_len > 0.0 && min_len <= max_len, "need 0 < min_len <= max_len");

  struct Range {
    std::size_t first, last;
  };
  std::vector<Range> ranges;
  std::size_t first = 0;
  for (std::size_t i = 0; i < cues.size(); ++i) {
    if (cues[i].end_s - cues[first].start_s >= min_len) {
      ranges.push_back({first, i});
      first = i + 1;
    }
  }
  if (first < cues.size()) {
    if (!ranges.empty())
      ranges.back().last = cues.size() - 1;
    else
      ranges.push_back({0, cues.size() - 1});
  }

  std::vector<ClipSpan> clips(ranges.size());
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    auto& clip = clips[k];
    clip.start_s = k == 0 ? cues[ranges[0].first].start_s : clips[k - 1].end_s;
    clip.end_s = k + 1 < ranges.size() ? cues[ranges[k + 1].first].start_s
                                       : cues[ranges[k].last].end_s;
    clip.cue_indices.resize(ranges[k].last - ranges[k].first + 1);
    std::iota(clip.cue_indices.begin(), clip.cue_indices.end(), ranges[k].first);
  }
  return clips;
}

}  // namespace avseg
