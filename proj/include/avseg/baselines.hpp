#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/rng.hpp"
#include "avseg/types.hpp"

namespace avseg {

// Equal-duration split of [0, T] into K intervals, clips assigned by midpoint.
inline Segmentation naive_equal_splits(const std::vector<double>& clip_midpoints_s,
                                       double total_duration_s, int K) {
  require_valid(!clip_midpoints_s.empty(), "no clips");
  require_valid(K >= 1 && K <= static_cast<int>(clip_midpoints_s.size()), "K out of range");
  require_valid(total_duration_s > 0.0, "total duration must be positive");
  std::vector<int> labels(clip_midpoints_s.size());
  for (std::size_t i = 0; i < clip_midpoints_s.size(); ++i) {
    const int bin = static_cast<int>(std::floor(clip_midpoints_s[i] * K / total_duration_s));
    labels[i] = std::clamp(bin, 0, K - 1);
  }
  return Segmentation::from_labels(std::move(labels));
}

struct KMeansConfig {
  int k = 1;
  int n_restarts = 10;
  int max_iters = 100;
  double tol = 1e-6;
  std::uint64_t rng_seed = 0;
};

struct CteConfig {
  double time_weight = 1.0;
  KMeansConfig kmeans;
};

namespace detail {

inline Eigen::Index sample_weighted(Rng& rng, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (total <= 0.0) return static_cast<Eigen::Index>(rng.uniform_int(
      static_cast<std::uint64_t>(weights.size())));
  double r = rng.uniform() * total;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r <= 0.0) return i;
  }
  return weights.size() - 1;
}

struct LloydResult {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

inline LloydResult lloyd_once(const Eigen::MatrixXd& pts, const KMeansConfig& cfg,
                              std::uint64_t seed) {
  const Eigen::Index n = pts.rows();
  const int k = cfg.k;
  Rng rng(seed);

  // kmeans++ seeding: first center uniform, then D^2 sampling.
  Eigen::MatrixXd centers(k, pts.cols());
  centers.row(0) = pts.row(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    centers.row(c) = pts.row(sample_weighted(rng, d2));
    d2 = d2.cwiseMin((pts.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  LloydResult res;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (pts.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (pts.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
      inertia += best_d;
    }
    res.labels = labels;
    res.inertia = inertia;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += pts.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    bool repaired = false;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      } else {
        // Empty cluster: re-seed at the point farthest from its old center.
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (pts.row(i) - centers.row(c)).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(c) = pts.row(far);
        repaired = true;
      }
    }
    if (repaired) {
      prev_inertia = std::numeric_limits<double>::infinity();
      continue;
    }
    if (!changed) break;
    if (std::isfinite(prev_inertia) && prev_inertia > 0.0 &&
        (prev_inertia - inertia) / prev_inertia <= cfg.tol)
      break;
    prev_inertia = inertia;
  }
  return res;
}

}  // namespace detail

inline Segmentation kmeans_segment(const std::vector<Eigen::VectorXd>& points,
                                   const KMeansConfig& cfg) {
  require_valid(!points.empty(), "no points");
  require_valid(cfg.k >= 1, "k must be >= 1");
  require_valid(cfg.k <= static_cast<int>(points.size()), "k exceeds point count");
  require_valid(cfg.n_restarts >= 1, "n_restarts must be >= 1");
  Eigen::MatrixXd pts(points.size(), points[0].size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    require_valid(points[i].size() == pts.cols(), "point dims differ");
    pts.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  detail::LloydResult best;
  for (int r = 0; r < cfg.n_restarts; ++r) {
    detail::LloydResult cur =
        detail::lloyd_once(pts, cfg, derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(r)));
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return Segmentation::from_labels(std::move(best.labels));
}

// Time-infused k-means: psi_i = [phi_i / |phi_i|, w_t * tau_i / T].
inline Segmentation cte_segment(const std::vector<Eigen::VectorXd>& points,
                                const std::vector<double>& taus, double total_duration_s,
                                const CteConfig& cfg) {
  require_valid(points.size() == taus.size(), "phi/tau length mismatch");
  require_valid(total_duration_s > 0.0, "total duration must be positive");
  require_valid(cfg.time_weight >= 0.0, "time_weight must be >= 0");
  std::vector<Eigen::VectorXd> psi(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double norm = points[i].norm();
    require(norm > 0.0, Errc::numeric, "zero-norm feature vector");
    psi[i].resize(points[i].size() + 1);
    psi[i].head(points[i].size()) = points[i] / norm;
    psi[i][points[i].size()] = cfg.time_weight * taus[i] / total_duration_s;
  }
  return kmeans_segment(psi, cfg.kmeans);
}

}  // namespace avseg
