#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/io.hpp"
#include "avseg/rng.hpp"
#include "avseg/types.hpp"

namespace avseg {

struct ModalityMask {
  bool v2d = true;
  bool v3d = true;
  bool ocr = true;

  bool any() const { return v2d || v3d || ocr; }
  bool operator==(const ModalityMask&) const = default;
};

struct ModelDims {
  std::uint32_t docr = 768;
  std::uint32_t dtext = 768;
  std::uint32_t d2d = 2048;
  std::uint32_t d3d = 2048;
  std::uint32_t e = 4096;

  // The OCR projection lands in a v2d-sized slot, so it scales with the
  // visual widths instead of adding a separate hyperparameter.
  std::uint32_t ocr_proj() const { return d2d; }
  std::uint32_t context() const { return ocr_proj() + d2d + d3d; }
  bool operator==(const ModelDims&) const = default;
};

inline ModelDims model_dims(const FeatureDims& f, std::uint32_t embed_dim) {
  require_valid(embed_dim >= 1, "embedding dim must be >= 1");
  return {f.docr, f.dtext, f.d2d, f.d3d, embed_dim};
}

// All learnable tensors in one flat row-major buffer, in checkpoint order.
// Flat storage keeps Adam, finite differencing, and serialization uniform.
class JointEmbeddingParams {
 public:
  using MatView = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstMatView =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using VecView = Eigen::Map<Eigen::VectorXd>;
  using ConstVecView = Eigen::Map<const Eigen::VectorXd>;

  static constexpr int kNumTensors = 12;

  explicit JointEmbeddingParams(ModelDims dims) : dims_(dims) {
    const auto e = static_cast<std::size_t>(dims.e);
    const auto c = static_cast<std::size_t>(dims.context());
    const auto op = static_cast<std::size_t>(dims.ocr_proj());
    shapes_ = {{{op, dims.docr},
                {op, 1},
                {e, c},
                {e, 1},
                {e, e},
                {e, 1},
                {e, dims.dtext},
                {e, 1},
                {e, e},
                {e, 1},
                {e, e},
                {e, 1}}};
    offsets_[0] = 0;
    for (int i = 0; i < kNumTensors; ++i)
      offsets_[static_cast<std::size_t>(i) + 1] =
          offsets_[static_cast<std::size_t>(i)] + shapes_[static_cast<std::size_t>(i)].first *
                                                      shapes_[static_cast<std::size_t>(i)].second;
    data_.assign(offsets_[kNumTensors], 0.0);
  }

  // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases
  static JointEmbeddingParams seeded_init(ModelDims dims, std::uint64_t seed) {
    JointEmbeddingParams p(dims);
    Rng rng(seed);
    for (int t = 0; t < kNumTensors; t += 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.shapes_[static_cast<std::size_t>(t)].second));
      double* begin = p.data_.data() + p.offsets_[static_cast<std::size_t>(t)];
      double* end = p.data_.data() + p.offsets_[static_cast<std::size_t>(t) + 1];
      for (double* x = begin; x != end; ++x) *x = rng.uniform(-bound, bound);
    }
    return p;
  }

  const ModelDims& dims() const { return dims_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  MatView w_ocr() { return mat(0); }
  VecView b_ocr() { return vec(1); }
  MatView w1c() { return mat(2); }
  VecView b1c() { return vec(3); }
  MatView w2c() { return mat(4); }
  VecView b2c() { return vec(5); }
  MatView w_txt() { return mat(6); }
  VecView b_txt() { return vec(7); }
  MatView w1t() { return mat(8); }
  VecView b1t() { return vec(9); }
  MatView w2t() { return mat(10); }
  VecView b2t() { return vec(11); }

  ConstMatView w_ocr() const { return mat(0); }
  ConstVecView b_ocr() const { return vec(1); }
  ConstMatView w1c() const { return mat(2); }
  ConstVecView b1c() const { return vec(3); }
  ConstMatView w2c() const { return mat(4); }
  ConstVecView b2c() const { return vec(5); }
  ConstMatView w_txt() const { return mat(6); }
  ConstVecView b_txt() const { return vec(7); }
  ConstMatView w1t() const { return mat(8); }
  ConstVecView b1t() const { return vec(9); }
  ConstMatView w2t() const { return mat(10); }
  ConstVecView b2t() const { return vec(11); }

 private:
  MatView mat(int t) {
    return {data_.data() + offsets_[static_cast<std::size_t>(t)],
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].first),
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].second)};
  }
  ConstMatView mat(int t) const {
    return {data_.data() + offsets_[static_cast<std::size_t>(t)],
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].first),
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].second)};
  }
  VecView vec(int t) {
    return {data_.data() + offsets_[static_cast<std::size_t>(t)],
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].first)};
  }
  ConstVecView vec(int t) const {
    return {data_.data() + offsets_[static_cast<std::size_t>(t)],
            static_cast<Eigen::Index>(shapes_[static_cast<std::size_t>(t)].first)};
  }

  ModelDims dims_;
  std::array<std::pair<std::size_t, std::size_t>, kNumTensors> shapes_;
  std::array<std::size_t, kNumTensors + 1> offsets_;
  std::vector<double> data_;
};

struct ClipEmbedding {
  std::string lecture_id;
  int clip_index = 0;
  Eigen::VectorXd v;
};

struct TextEmbedding {
  std::string lecture_id;
  int clip_index = 0;
  Eigen::VectorXd v;
};

struct TrainConfig {
  int batch_size = 32;
  double margin = 0.1;
  double lr = 1e-4;
  double lr_decay = 0.9;
  int epochs = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double intra_lecture_fraction = 0.5;
  std::uint64_t rng_seed = 0;
  ModalityMask mask;
};

inline void validate_train_config(const TrainConfig& cfg) {
  require_valid(cfg.batch_size >= 2 && cfg.batch_size % 2 == 0, "batch_size must be even, >= 2");
  require_valid(cfg.margin >= 0.0, "margin must be >= 0");
  require_valid(cfg.lr >= 0.0, "lr must be >= 0");
  require_valid(cfg.lr_decay > 0.0, "lr_decay must be positive");
  require_valid(cfg.epochs >= 0, "epochs must be >= 0");
  require_valid(cfg.intra_lecture_fraction > 0.0 && cfg.intra_lecture_fraction < 1.0,
                "intra_lecture_fraction must be in (0, 1)");
  require_valid(cfg.mask.any(), "at least one clip modality must be enabled");
}

namespace detail {

inline Eigen::VectorXd to_f64(const std::vector<float>& v) {
  return Eigen::Map<const Eigen::VectorXf>(v.data(), static_cast<Eigen::Index>(v.size()))
      .cast<double>();
}

inline void check_record_dims(const JointEmbeddingParams& p, const ClipFeatureRecord& rec) {
  const FeatureDims d = rec.dims();
  const ModelDims& m = p.dims();
  require(d.docr == m.docr && d.dtext == m.dtext && d.d2d == m.d2d && d.d3d == m.d3d,
          Errc::dim_mismatch, "record feature dims do not match model dims");
}

// c = concat(W_ocr*ocr + b_ocr, v2d, v3d); masked slices stay zero.
inline Eigen::VectorXd context_vector(const JointEmbeddingParams& p, const ClipFeatureRecord& rec,
                                      const ModalityMask& mask) {
  const ModelDims& m = p.dims();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m.context());
  if (mask.ocr) c.head(m.ocr_proj()) = p.w_ocr() * to_f64(rec.ocr) + p.b_ocr();
  if (mask.v2d) c.segment(m.ocr_proj(), m.d2d) = to_f64(rec.v2d);
  if (mask.v3d) c.tail(m.d3d) = to_f64(rec.v3d);
  return c;
}

template <typename Derived>
inline auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace detail

// f(c) = h (.) sigmoid(W2c*h + b2c), h = W1c*c + b1c
inline ClipEmbedding embed_clip(const JointEmbeddingParams& p, const ClipFeatureRecord& rec,
                                const ModalityMask& mask = {}) {
  require_valid(mask.any(), "modality mask is empty");
  detail::check_record_dims(p, rec);
  const Eigen::VectorXd c = detail::context_vector(p, rec, mask);
  const Eigen::VectorXd h = p.w1c() * c + p.b1c();
  const Eigen::VectorXd z = p.w2c() * h + p.b2c();
  return {rec.lecture_id, rec.clip_index, h.cwiseProduct(detail::sigmoid(z))};
}

// g(t) = h (.) sigmoid(W2t*h + b2t), h = W1t*t + b1t, t = W_txt*text + b_txt
inline TextEmbedding embed_text(const JointEmbeddingParams& p, const ClipFeatureRecord& rec) {
  detail::check_record_dims(p, rec);
  const Eigen::VectorXd t = p.w_txt() * detail::to_f64(rec.text) + p.b_txt();
  const Eigen::VectorXd h = p.w1t() * t + p.b1t();
  const Eigen::VectorXd z = p.w2t() * h + p.b2t();
  return {rec.lecture_id, rec.clip_index, h.cwiseProduct(detail::sigmoid(z))};
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  require(na > 0.0 && nb > 0.0, Errc::numeric, "degenerate embedding");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

inline double similarity(const ClipEmbedding& a, const TextEmbedding& b) {
  return cosine(a.v, b.v);
}

struct BatchLossResult {
  double loss = 0.0;
  JointEmbeddingParams grads;
};

// Eq-style max-margin ranking loss over all in-batch pairs:
// loss = sum_i sum_{j != i} max(0, m + s_ij - s_ii) + max(0, m + s_ji - s_ii),
// s = cosine(f_i, g_j). Gradients are exact; the hinge kink contributes 0.
inline BatchLossResult batch_loss(const JointEmbeddingParams& p,
                                  const std::vector<const ClipFeatureRecord*>& batch,
                                  double margin, const ModalityMask& mask = {}) {
  require_valid(batch.size() >= 2, "batch needs at least two pairs");
  require_valid(mask.any(), "modality mask is empty");
  const ModelDims& md = p.dims();
  const auto B = static_cast<Eigen::Index>(batch.size());
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  RowMat X(B, md.context()), Xocr(B, md.docr), Xtxt(B, md.dtext);
  for (Eigen::Index i = 0; i < B; ++i) {
    const ClipFeatureRecord& rec = *batch[static_cast<std::size_t>(i)];
    detail::check_record_dims(p, rec);
    X.row(i) = detail::context_vector(p, rec, mask).transpose();
    Xocr.row(i) = detail::to_f64(rec.ocr).transpose();
    Xtxt.row(i) = detail::to_f64(rec.text).transpose();
  }

  // clip tower
  RowMat H = (X * p.w1c().transpose()).rowwise() + p.b1c().transpose();
  RowMat Z = (H * p.w2c().transpose()).rowwise() + p.b2c().transpose();
  RowMat S = detail::sigmoid(Z);
  RowMat F = H.cwiseProduct(S);
  // text tower
  RowMat T = (Xtxt * p.w_txt().transpose()).rowwise() + p.b_txt().transpose();
  RowMat Ht = (T * p.w1t().transpose()).rowwise() + p.b1t().transpose();
  RowMat Zt = (Ht * p.w2t().transpose()).rowwise() + p.b2t().transpose();
  RowMat St = detail::sigmoid(Zt);
  RowMat G = Ht.cwiseProduct(St);

  const Eigen::VectorXd fn = F.rowwise().norm();
  const Eigen::VectorXd gn = G.rowwise().norm();
  require((fn.array() > 0.0).all() && (gn.array() > 0.0).all(), Errc::numeric,
          "degenerate embedding");
  const RowMat FU = fn.cwiseInverse().asDiagonal() * F;
  const RowMat GU = gn.cwiseInverse().asDiagonal() * G;
  const RowMat scores = FU * GU.transpose();

  BatchLossResult res{0.0, JointEmbeddingParams(md)};
  RowMat dscore = RowMat::Zero(B, B);
  for (Eigen::Index i = 0; i < B; ++i) {
    for (Eigen::Index j = 0; j < B; ++j) {
      if (j == i) continue;
      const double a = margin + scores(i, j) - scores(i, i);
      if (a > 0.0) {
        res.loss += a;
        dscore(i, j) += 1.0;
        dscore(i, i) -= 1.0;
      }
      const double b = margin + scores(j, i) - scores(i, i);
      if (b > 0.0) {
        res.loss += b;
        dscore(j, i) += 1.0;
        dscore(i, i) -= 1.0;
      }
    }
  }

  // through the cosine: dF_i = (dFU_i - (dFU_i . FU_i) FU_i) / |F_i|
  RowMat dFU = dscore * GU;
  RowMat dGU = dscore.transpose() * FU;
  const Eigen::VectorXd fdot = dFU.cwiseProduct(FU).rowwise().sum();
  const Eigen::VectorXd gdot = dGU.cwiseProduct(GU).rowwise().sum();
  RowMat dF = fn.cwiseInverse().asDiagonal() * (dFU - fdot.asDiagonal() * FU);
  RowMat dG = gn.cwiseInverse().asDiagonal() * (dGU - gdot.asDiagonal() * GU);

  JointEmbeddingParams& g = res.grads;
  {  // clip tower backward
    RowMat dZ = dF.cwiseProduct(H).cwiseProduct(S).cwiseProduct(
        (1.0 - S.array()).matrix());
    RowMat dH = dF.cwiseProduct(S) + dZ * p.w2c();
    g.w2c() = dZ.transpose() * H;
    g.b2c() = dZ.colwise().sum().transpose();
    g.w1c() = dH.transpose() * X;
    g.b1c() = dH.colwise().sum().transpose();
    if (mask.ocr) {
      RowMat dX = dH * p.w1c();
      g.w_ocr() = dX.leftCols(md.ocr_proj()).transpose() * Xocr;
      g.b_ocr() = dX.leftCols(md.ocr_proj()).colwise().sum().transpose();
    }
  }
  {  // text tower backward
    RowMat dZ = dG.cwiseProduct(Ht).cwiseProduct(St).cwiseProduct(
        (1.0 - St.array()).matrix());
    RowMat dH = dG.cwiseProduct(St) + dZ * p.w2t();
    g.w2t() = dZ.transpose() * Ht;
    g.b2t() = dZ.colwise().sum().transpose();
    g.w1t() = dH.transpose() * T;
    g.b1t() = dH.colwise().sum().transpose();
    RowMat dT = dH * p.w1t();
    g.w_txt() = dT.transpose() * Xtxt;
    g.b_txt() = dT.colwise().sum().transpose();
  }
  return res;
}

// Batch composition realizing the half-hard-negative scheme: a fixed share of
// pairs from one anchor lecture, the rest from uniformly drawn other lectures.
class BatchSampler {
 public:
  BatchSampler(const std::vector<Lecture>& corpus, int batch_size, double intra_fraction)
      : corpus_(&corpus), batch_size_(batch_size) {
    require_valid(corpus.size() >= 2, "training needs at least two lectures");
    intra_ = std::clamp(static_cast<int>(std::llround(batch_size * intra_fraction)), 1,
                        batch_size - 1);
    total_pairs_ = 0;
    for (const auto& lec : corpus) total_pairs_ += lec.clips.size();
  }

  int steps_per_epoch() const {
    return static_cast<int>((total_pairs_ + static_cast<std::size_t>(batch_size_) - 1) /
                            static_cast<std::size_t>(batch_size_));
  }

  // (lecture index, clip index) per batch slot; the first entries come from
  // the anchor lecture, without replacement when it is large enough.
  std::vector<std::pair<int, int>> sample(Rng& rng) const {
    const auto& corpus = *corpus_;
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(batch_size_));
    const int anchor = static_cast<int>(rng.uniform_int(corpus.size()));
    const auto n_anchor = corpus[static_cast<std::size_t>(anchor)].clips.size();
    if (n_anchor >= static_cast<std::size_t>(intra_)) {
      std::vector<int> idx(n_anchor);
      std::iota(idx.begin(), idx.end(), 0);
      for (int d = 0; d < intra_; ++d) {
        const auto pick = d + static_cast<int>(rng.uniform_int(n_anchor - static_cast<std::size_t>(d)));
        std::swap(idx[static_cast<std::size_t>(d)], idx[static_cast<std::size_t>(pick)]);
        out.emplace_back(anchor, idx[static_cast<std::size_t>(d)]);
      }
    } else {
      for (int d = 0; d < intra_; ++d)
        out.emplace_back(anchor, static_cast<int>(rng.uniform_int(n_anchor)));
    }
    for (int d = intra_; d < batch_size_; ++d) {
      auto other = static_cast<int>(rng.uniform_int(corpus.size() - 1));
      if (other >= anchor) ++other;
      out.emplace_back(other, static_cast<int>(rng.uniform_int(
                                  corpus[static_cast<std::size_t>(other)].clips.size())));
    }
    return out;
  }

 private:
  const std::vector<Lecture>* corpus_;
  int batch_size_;
  int intra_;
  std::size_t total_pairs_;
};

struct TrainState {
  JointEmbeddingParams params;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  std::uint64_t adam_t = 0;
  std::uint32_t epochs_done = 0;

  explicit TrainState(JointEmbeddingParams p)
      : params(std::move(p)),
        adam_m(params.data().size(), 0.0),
        adam_v(params.data().size(), 0.0) {}
};

using EpochCallback = std::function<void(int epoch, double mean_loss, const TrainState&)>;

// Runs epochs [state.epochs_done, cfg.epochs); per-epoch sampling streams are
// derived from (rng_seed, epoch) so a resumed run reproduces an uninterrupted
// one bit for bit. Returns the mean loss of each epoch run.
inline std::vector<double> train_epochs(TrainState& state, const std::vector<Lecture>& corpus,
                                        const TrainConfig& cfg,
                                        const EpochCallback& on_epoch = nullptr) {
  validate_train_config(cfg);
  require_valid(corpus.size() >= 2, "training needs at least two lectures");
  for (const auto& lec : corpus) {
    require_valid(!lec.clips.empty(), "corpus lecture without clips");
    detail::check_record_dims(state.params, lec.clips.front());
  }

  BatchSampler sampler(corpus, cfg.batch_size, cfg.intra_lecture_fraction);
  const std::size_t n_params = state.params.data().size();
  std::vector<double> epoch_losses;
  for (int epoch = static_cast<int>(state.epochs_done); epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(epoch)));
    const double lr = cfg.lr * std::pow(cfg.lr_decay, epoch);
    double loss_sum = 0.0;
    const int steps = sampler.steps_per_epoch();
    for (int step = 0; step < steps; ++step) {
      const auto picks = sampler.sample(rng);
      std::vector<const ClipFeatureRecord*> batch(picks.size());
      for (std::size_t b = 0; b < picks.size(); ++b)
        batch[b] = &corpus[static_cast<std::size_t>(picks[b].first)]
                        .clips[static_cast<std::size_t>(picks[b].second)];
      BatchLossResult r = batch_loss(state.params, batch, cfg.margin, cfg.mask);
      require(std::isfinite(r.loss), Errc::numeric,
              "non-finite loss at epoch " + std::to_string(epoch) + " step " +
                  std::to_string(step));
      loss_sum += r.loss;

      ++state.adam_t;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.adam_t));
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.adam_t));
      double* th = state.params.data().data();
      const double* gr = r.grads.data().data();
      for (std::size_t i = 0; i < n_params; ++i) {
        state.adam_m[i] = cfg.adam_beta1 * state.adam_m[i] + (1.0 - cfg.adam_beta1) * gr[i];
        state.adam_v[i] = cfg.adam_beta2 * state.adam_v[i] + (1.0 - cfg.adam_beta2) * gr[i] * gr[i];
        th[i] -= lr * (state.adam_m[i] / bc1) / (std::sqrt(state.adam_v[i] / bc2) + cfg.adam_eps);
      }
    }
    const double mean_loss = loss_sum / steps;
    epoch_losses.push_back(mean_loss);
    state.epochs_done = static_cast<std::uint32_t>(epoch + 1);
    if (on_epoch) on_epoch(epoch, mean_loss, state);
  }
  return epoch_losses;
}

struct TrainResult {
  JointEmbeddingParams params;
  std::vector<double> epoch_losses;
};

inline TrainResult train(const JointEmbeddingParams& init, const std::vector<Lecture>& corpus,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = nullptr) {
  TrainState state(init);
  std::vector<double> losses = train_epochs(state, corpus, cfg, on_epoch);
  return {std::move(state.params), std::move(losses)};
}

struct RetrievalHit {
  std::string lecture_id;
  int clip_index = 0;
  double score = 0.0;
};

inline std::vector<RetrievalHit> retrieve(const Eigen::VectorXd& query,
                                          const std::vector<ClipEmbedding>& clips, int top_k) {
  require_valid(!clips.empty(), "no clip embeddings to rank");
  require_valid(top_k >= 1, "top_k must be >= 1");
  std::vector<RetrievalHit> hits;
  hits.reserve(clips.size());
  for (const auto& c : clips) hits.push_back({c.lecture_id, c.clip_index, cosine(query, c.v)});
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.lecture_id != b.lecture_id) return a.lecture_id < b.lecture_id;
    return a.clip_index < b.clip_index;
  });
  if (static_cast<int>(hits.size()) > top_k) hits.resize(static_cast<std::size_t>(top_k));
  return hits;
}

// ---- AVLE checkpoint ----

inline constexpr std::string_view kParamsMagic = "AVLE";
inline constexpr std::uint32_t kParamsVersion = 1;

namespace detail {

inline void write_model_dims(ByteWriter& w, const ModelDims& d) {
  w.u32(d.docr);
  w.u32(d.dtext);
  w.u32(d.d2d);
  w.u32(d.d3d);
  w.u32(d.e);
}

inline ModelDims read_model_dims(ByteReader& r) {
  ModelDims d;
  d.docr = r.u32();
  d.dtext = r.u32();
  d.d2d = r.u32();
  d.d3d = r.u32();
  d.e = r.u32();
  require(d.docr >= 1 && d.dtext >= 1 && d.d2d >= 1 && d.d3d >= 1 && d.e >= 1,
          Errc::dim_mismatch, "checkpoint declares zero dims");
  return d;
}

}  // namespace detail

inline std::string encode_params(const JointEmbeddingParams& p) {
  ByteWriter w;
  w.bytes(kParamsMagic);
  w.u32(kParamsVersion);
  detail::write_model_dims(w, p.dims());
  w.f64_array(p.data().data(), p.data().size());
  return w.str();
}

inline JointEmbeddingParams decode_params(std::string_view data) {
  ByteReader r(data);
  require(r.bytes(4) == kParamsMagic, Errc::bad_magic, "bad magic, expected AVLE");
  const std::uint32_t version = r.u32();
  require(version == kParamsVersion, Errc::bad_version,
          "unsupported AVLE version " + std::to_string(version));
  JointEmbeddingParams p(detail::read_model_dims(r));
  r.f64_array(p.data().data(), p.data().size());
  r.expect_exhausted();
  for (double x : p.data())
    require(std::isfinite(x), Errc::numeric, "non-finite checkpoint entry");
  return p;
}

inline void save_params(const JointEmbeddingParams& p, const std::filesystem::path& path) {
  spit(path, encode_params(p));
}

inline JointEmbeddingParams load_params(const std::filesystem::path& path) {
  return decode_params(slurp(path));
}

// ---- AVLS training state (params + optimizer moments), resume plumbing ----

inline constexpr std::string_view kTrainStateMagic = "AVLS";
inline constexpr std::uint32_t kTrainStateVersion = 1;

inline std::string encode_train_state(const TrainState& s) {
  ByteWriter w;
  w.bytes(kTrainStateMagic);
  w.u32(kTrainStateVersion);
  detail::write_model_dims(w, s.params.dims());
  w.u32(s.epochs_done);
  w.u64(s.adam_t);
  w.f64_array(s.params.data().data(), s.params.data().size());
  w.f64_array(s.adam_m.data(), s.adam_m.size());
  w.f64_array(s.adam_v.data(), s.adam_v.size());
  return w.str();
}

inline TrainState decode_train_state(std::string_view data) {
  ByteReader r(data);
  require(r.bytes(4) == kTrainStateMagic, Errc::bad_magic, "bad magic, expected AVLS");
  const std::uint32_t version = r.u32();
  require(version == kTrainStateVersion, Errc::bad_version,
          "unsupported AVLS version " + std::to_string(version));
  TrainState s{JointEmbeddingParams(detail::read_model_dims(r))};
  s.epochs_done = r.u32();
  s.adam_t = r.u64();
  r.f64_array(s.params.data().data(), s.params.data().size());
  r.f64_array(s.adam_m.data(), s.adam_m.size());
  r.f64_array(s.adam_v.data(), s.adam_v.size());
  r.expect_exhausted();
  return s;
}

inline void save_train_state(const TrainState& s, const std::filesystem::path& path) {
  spit(path, encode_train_state(s));
}

inline TrainState load_train_state(const std::filesystem::path& path) {
  return decode_train_state(slurp(path));
}

// ---- AVLZ per-lecture embedding dump ----

inline constexpr std::string_view kEmbeddingsMagic = "AVLZ";

struct LectureEmbeddings {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat f;  // n_clips x E, clip tower
  RowMat g;  // n_clips x E, text tower
};

inline LectureEmbeddings embed_lecture(const JointEmbeddingParams& p, const Lecture& lec,
                                       const ModalityMask& mask = {}) {
  LectureEmbeddings out;
  const auto n = static_cast<Eigen::Index>(lec.clips.size());
  out.f.resize(n, p.dims().e);
  out.g.resize(n, p.dims().e);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.f.row(i) = embed_clip(p, lec.clips[static_cast<std::size_t>(i)], mask).v.transpose();
    out.g.row(i) = embed_text(p, lec.clips[static_cast<std::size_t>(i)]).v.transpose();
  }
  return out;
}

inline std::string encode_embeddings(const LectureEmbeddings& emb) {
  require_valid(emb.f.rows() == emb.g.rows() && emb.f.cols() == emb.g.cols(),
                "embedding towers disagree in shape");
  ByteWriter w;
  w.bytes(kEmbeddingsMagic);
  w.u32(static_cast<std::uint32_t>(emb.f.rows()));
  w.u32(static_cast<std::uint32_t>(emb.f.cols()));
  for (Eigen::Index i = 0; i < emb.f.rows(); ++i) {
    w.f64_array(emb.f.row(i).data(), static_cast<std::size_t>(emb.f.cols()));
    w.f64_array(emb.g.row(i).data(), static_cast<std::size_t>(emb.g.cols()));
  }
  return w.str();
}

inline LectureEmbeddings decode_embeddings(std::string_view data) {
  ByteReader r(data);
  require(r.bytes(4) == kEmbeddingsMagic, Errc::bad_magic, "bad magic, expected AVLZ");
  const std::uint32_t n = r.u32();
  const std::uint32_t e = r.u32();
  require(e >= 1, Errc::dim_mismatch, "embedding dump declares zero dim");
  LectureEmbeddings out;
  out.f.resize(n, e);
  out.g.resize(n, e);
  for (std::uint32_t i = 0; i < n; ++i) {
    r.f64_array(out.f.row(i).data(), e);
    r.f64_array(out.g.row(i).data(), e);
  }
  r.expect_exhausted();
  return out;
}

inline void save_embeddings(const LectureEmbeddings& emb, const std::filesystem::path& path) {
  spit(path, encode_embeddings(emb));
}

inline LectureEmbeddings load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(slurp(path));
}

}  // namespace avseg
