#include <catch2/catch_amalgamated.hpp>
#include <vector>

#include "avseg/clipify.hpp"
#include "avseg/rng.hpp"

using avseg::ClipSpan;
using avseg::SubtitleCue;

namespace {

std::vector<SubtitleCue> cues_for(const std::vector<std::pair<double, double>>& spans) {
  std::vector<SubtitleCue> cues;
  for (const auto& [s, e] : spans) cues.push_back({s, e, ""});
  return cues;
}

}  // namespace

TEST_CASE("short remainder merges into the previous clip") {
  const auto clips = avseg::clipify(cues_for({{0, 6}, {6, 12}, {12, 14}}), 10, 15);
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].start_s == 0.0);
  CHECK(clips[0].end_s == 14.0);
  CHECK(clips[0].cue_indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("a single long cue is never split") {
  const auto clips = avseg::clipify(cues_for({{0, 30}}), 10, 15);
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].start_s == 0.0);
  CHECK(clips[0].end_s == 30.0);
}

TEST_CASE("clips close as soon as they reach min_len") {
  const auto clips = avseg::clipify(cues_for({{0, 5}, {5, 10}, {10, 15}, {15, 20}}), 10, 15);
  REQUIRE(clips.size() == 2);
  CHECK(clips[0].start_s == 0.0);
  CHECK(clips[0].end_s == 10.0);
  CHECK(clips[1].start_s == 10.0);
  CHECK(clips[1].end_s == 20.0);
  CHECK(clips[0].cue_indices == std::vector<std::size_t>{0, 1});
  CHECK(clips[1].cue_indices == std::vector<std::size_t>{2, 3});
}

TEST_CASE("overshoot past max_len is allowed while still under min_len") {
  // second cue pushes duration to 20s > max, but the clip was only 9s
  const auto clips = avseg::clipify(cues_for({{0, 9}, {9, 20}}), 10, 15);
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].end_s == 20.0);
}

TEST_CASE("inter-cue gaps belong to the earlier clip") {
  // gap [12, 14) between the closing cue of clip 0 and the first of clip 1
  const auto clips = avseg::clipify(cues_for({{0, 12}, {14, 21}, {21, 25}}), 10, 15);
  REQUIRE(clips.size() == 2);
  CHECK(clips[0].start_s == 0.0);
  CHECK(clips[0].end_s == 14.0);
  CHECK(clips[1].start_s == 14.0);
  CHECK(clips[1].end_s == 25.0);
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(avseg::clipify({}, 10, 15), avseg::Error);
  CHECK_THROWS_AS(avseg::clipify(cues_for({{0, 5}, {4, 9}}), 10, 15), avseg::Error);
  CHECK_THROWS_AS(avseg::clipify(cues_for({{0, 5}}), 0.0, 15), avseg::Error);
  CHECK_THROWS_AS(avseg::clipify(cues_for({{0, 5}}), 15, 10), avseg::Error);
}

TEST_CASE("clips tile the cue span with every cue used exactly once") {
  avseg::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SubtitleCue> cues;
    double t = rng.uniform(0.0, 5.0);
    const int n = 1 + static_cast<int>(rng.uniform_int(40));
    for (int i = 0; i < n; ++i) {
      const double dur = rng.uniform(0.5, 8.0);
      cues.push_back({t, t + dur, ""});
      t += dur + (rng.uniform() < 0.3 ? rng.uniform(0.0, 2.0) : 0.0);
    }
    const auto clips = avseg::clipify(cues, 10, 15);

    REQUIRE(!clips.empty());
    CHECK(clips.front().start_s == cues.front().start_s);
    CHECK(clips.back().end_s == cues.back().end_s);
    std::size_t next_cue = 0;
    for (std::size_t k = 0; k < clips.size(); ++k) {
      if (k > 0) CHECK(clips[k].start_s == clips[k - 1].end_s);
      REQUIRE(!clips[k].cue_indices.empty());
      for (std::size_t c : clips[k].cue_indices) {
        CHECK(c == next_cue);
        ++next_cue;
      }
      // whole cues only: the clip covers each of its cues
      CHECK(clips[k].start_s <= cues[clips[k].cue_indices.front()].start_s);
      CHECK(clips[k].end_s >= cues[clips[k].cue_indices.back()].end_s);
    }
    CHECK(next_cue == cues.size());
    // every clip but the last reaches min_len
    for (std::size_t k = 0; k + 1 < clips.size(); ++k)
      CHECK(clips[k].end_s - clips[k].start_s >= 10.0);
  }
}
