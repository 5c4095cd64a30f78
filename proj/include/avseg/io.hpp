#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/types.hpp"
#include "json.hpp"

namespace avseg {

// ---- little-endian byte buffers ----

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  void f32_array(const std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::little) {
      const std::size_t off = buf_.size();
      buf_.resize(off + v.size() * 4);
      std::memcpy(buf_.data() + off, v.data(), v.size() * 4);
    } else {
      for (float x : v) f32(x);
    }
  }
  void f64_array(const double* v, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      const std::size_t off = buf_.size();
      buf_.resize(off + n * 8);
      std::memcpy(buf_.data() + off, v, n * 8);
    } else {
      for (std::size_t i = 0; i < n; ++i) f64(v[i]);
    }
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void f32_array(std::vector<float>& out, std::size_t n) {
    need(n * 4);
    out.resize(n);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), data_.data() + pos_, n * 4);
      pos_ += n * 4;
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = f32();
    }
  }
  void f64_array(double* out, std::size_t n) {
    need(n * 8);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out, data_.data() + pos_, n * 8);
      pos_ += n * 8;
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = f64();
    }
  }
  bool exhausted() const { return pos_ == data_.size(); }
  void expect_exhausted() {
    require(exhausted(), Errc::trailing_data, "trailing bytes after payload");
  }

 private:
  void need(std::size_t n) {
    require(pos_ + n <= data_.size(), Errc::truncated, "file truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::missing_artifact, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void spit(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require_valid(out.good(), "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  require_valid(out.good(), "short write to " + path.string());
}

// ---- AVLF per-lecture feature file ----

inline constexpr std::string_view kFeatureMagic = "AVLF";
inline constexpr std::uint32_t kFeatureVersion = 1;

inline std::string encode_features(const Lecture& lec) {
  validate_lecture(lec);
  const FeatureDims dims = lec.dims();
  ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(lec.lecture_id.size()));
  w.bytes(lec.lecture_id);
  w.f64(lec.total_duration_s);
  w.u32(static_cast<std::uint32_t>(lec.clips.size()));
  w.u32(dims.d2d);
  w.u32(dims.d3d);
  w.u32(dims.docr);
  w.u32(dims.dtext);
  for (const auto& c : lec.clips) {
    w.f64(c.start_s);
    w.f64(c.end_s);
    w.f32_array(c.v2d);
    w.f32_array(c.v3d);
    w.f32_array(c.ocr);
    w.f32_array(c.text);
  }
  return w.str();
}

inline Lecture decode_features(std::string_view data) {
  ByteReader r(data);
  require(r.bytes(4) == kFeatureMagic, Errc::bad_magic, "bad magic, expected AVLF");
  const std::uint32_t version = r.u32();
  require(version == kFeatureVersion, Errc::bad_version,
          "unsupported AVLF version " + std::to_string(version));
  Lecture lec;
  lec.lecture_id = r.bytes(r.u32());
  lec.total_duration_s = r.f64();
  const std::uint32_t n_clips = r.u32();
  FeatureDims dims;
  dims.d2d = r.u32();
  dims.d3d = r.u32();
  dims.docr = r.u32();
  dims.dtext = r.u32();
  lec.clips.resize(n_clips);
  for (std::uint32_t i = 0; i < n_clips; ++i) {
    auto& c = lec.clips[i];
    c.lecture_id = lec.lecture_id;
    c.clip_index = static_cast<int>(i);
    c.start_s = r.f64();
    c.end_s = r.f64();
    r.f32_array(c.v2d, dims.d2d);
    r.f32_array(c.v3d, dims.d3d);
    r.f32_array(c.ocr, dims.docr);
    r.f32_array(c.text, dims.dtext);
  }
  r.expect_exhausted();
  validate_lecture(lec);
  return lec;
}

inline void write_features(const Lecture& lec, const std::filesystem::path& path) {
  spit(path, encode_features(lec));
}

inline Lecture read_features(const std::filesystem::path& path) {
  return decode_features(slurp(path));
}

// ---- ground-truth boundary file (JSON) ----

inline void write_gt(const std::string& lecture_id, const std::vector<double>& boundaries_s,
                     const std::filesystem::path& path) {
  nlohmann::json j;
  j["lecture_id"] = lecture_id;
  j["boundaries_s"] = boundaries_s;
  spit(path, j.dump(2) + "\n");
}

struct GtRecord {
  std::string lecture_id;
  std::vector<double> boundaries_s;
};

inline GtRecord read_gt(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::validation, "bad ground-truth JSON " + path.string() + ": " + e.what());
  }
  GtRecord rec;
  rec.lecture_id = j.at("lecture_id").get<std::string>();
  rec.boundaries_s = j.at("boundaries_s").get<std::vector<double>>();
  require_valid(std::is_sorted(rec.boundaries_s.begin(), rec.boundaries_s.end()),
                "ground-truth boundaries not sorted: " + path.string());
  return rec;
}

// ---- segmentation output (JSON) ----

struct SegmentationRecord {
  std::string lecture_id;
  std::string method;
  double alpha_used = 0.0;
  Segmentation seg;
  std::vector<double> boundaries_s;
};

inline void write_segmentation(const SegmentationRecord& rec,
                               const std::filesystem::path& path) {
  nlohmann::json j;
  j["lecture_id"] = rec.lecture_id;
  j["k"] = rec.seg.k;
  j["alpha_used"] = rec.alpha_used;
  j["contiguous"] = rec.seg.contiguous;
  j["labels"] = rec.seg.labels;
  j["boundaries_s"] = rec.boundaries_s;
  j["method"] = rec.method;
  spit(path, j.dump(2) + "\n");
}

inline SegmentationRecord read_segmentation(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::validation, "bad segmentation JSON " + path.string() + ": " + e.what());
  }
  SegmentationRecord rec;
  rec.lecture_id = j.at("lecture_id").get<std::string>();
  rec.method = j.at("method").get<std::string>();
  rec.alpha_used = j.at("alpha_used").get<double>();
  rec.boundaries_s = j.at("boundaries_s").get<std::vector<double>>();
  rec.seg = Segmentation::from_labels(j.at("labels").get<std::vector<int>>());
  require_valid(rec.seg.k == j.at("k").get<int>(), "segmentation k field mismatch");
  return rec;
}

// ---- corpus layout: manifest.jsonl + features/ + gt/ ----

struct ManifestEntry {
  std::string lecture_id;
  std::string path;  // relative to corpus dir
  std::uint32_t n_clips = 0;
  std::vector<double> gt_boundaries_s;
};

inline void write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& path) {
  std::string out;
  for (const auto& e : entries) {
    nlohmann::json j;
    j["lecture_id"] = e.lecture_id;
    j["path"] = e.path;
    j["n_clips"] = e.n_clips;
    j["gt_boundaries_s"] = e.gt_boundaries_s;
    out += j.dump();
    out += '\n';
  }
  spit(path, out);
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::istringstream in(slurp(path));
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::validation, "bad manifest line " + std::to_string(entries.size() + 1) + ": " +
                                 e.what());
    }
    ManifestEntry e;
    e.lecture_id = j.at("lecture_id").get<std::string>();
    e.path = j.at("path").get<std::string>();
    e.n_clips = j.at("n_clips").get<std::uint32_t>();
    e.gt_boundaries_s = j.at("gt_boundaries_s").get<std::vector<double>>();
    entries.push_back(std::move(e));
  }
  return entries;
}

inline void write_corpus(const std::vector<Lecture>& lectures,
                         const std::filesystem::path& dir) {
  std::vector<ManifestEntry> manifest;
  manifest.reserve(lectures.size());
  for (const auto& lec : lectures) {
    ManifestEntry e;
    e.lecture_id = lec.lecture_id;
    e.path = "features/" + lec.lecture_id + ".avlf";
    e.n_clips = static_cast<std::uint32_t>(lec.clips.size());
    if (lec.gt) e.gt_boundaries_s = boundaries_from_segmentation(lec, *lec.gt);
    write_features(lec, dir / e.path);
    if (lec.gt) write_gt(lec.lecture_id, e.gt_boundaries_s, dir / "gt" / (lec.lecture_id + ".json"));
    manifest.push_back(std::move(e));
  }
  write_manifest(manifest, dir / "manifest.jsonl");
}

inline std::vector<Lecture> read_corpus(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir / "manifest.jsonl");
  std::vector<Lecture> lectures;
  lectures.reserve(manifest.size());
  for (const auto& e : manifest) {
    Lecture lec = read_features(dir / e.path);
    require_valid(lec.lecture_id == e.lecture_id,
                  "manifest id mismatch for " + e.lecture_id);
    const auto gt_path = dir / "gt" / (e.lecture_id + ".json");
    if (std::filesystem::exists(gt_path)) {
      const GtRecord gt = read_gt(gt_path);
      lec.gt = segmentation_from_boundaries(lec, gt.boundaries_s);
      validate_lecture(lec);
    }
    lectures.push_back(std::move(lec));
  }
  return lectures;
}

}  // namespace avseg
