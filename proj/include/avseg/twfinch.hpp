#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/types.hpp"

namespace avseg {

struct ClipPoint {
  Eigen::VectorXd phi;
  double tau = 0.0;
  int weight = 1;
};

struct TwfinchConfig {
  double alpha_init = 1.0;
  double alpha_step = 0.1;
  double alpha_max = 5.0;
  bool require_contiguous = true;
  // Also link nodes that share the same nearest neighbor (the original FINCH
  // adjacency clause). Off by default: plain 1-NN edges only.
  bool shared_neighbor = false;
};

inline void validate_twfinch_config(const TwfinchConfig& cfg) {
  require_valid(cfg.alpha_step > 0.0, "alpha_step must be positive");
  require_valid(cfg.alpha_max >= cfg.alpha_init, "alpha_max must be >= alpha_init");
}

struct PartitionHierarchy {
  // Finest (the first 1-NN partition) down to the one-cluster root. Labels
  // cover the original points, canonicalized by temporal first occurrence.
  std::vector<Segmentation> levels;
};

struct SegmentResult {
  Segmentation seg;
  double alpha_used = 0.0;
  bool warning = false;   // contiguity not reached within alpha_max
  bool fallback = false;  // auto-K hierarchy shorter than requested depth
};

// E = E_s * E_tau^alpha with E_s = 1 - cos(phi_m, phi_n) and
// E_tau = |tau_m - tau_n| / T. E_s is evaluated as half the squared distance
// of the normalized vectors, which is exactly zero for identical inputs.
inline double pair_distance(const ClipPoint& m, const ClipPoint& n, double total_duration_s,
                            double alpha) {
  require_valid(total_duration_s > 0.0, "total duration must be positive");
  const double nm = m.phi.norm(), nn = n.phi.norm();
  require(nm > 0.0 && nn > 0.0, Errc::numeric, "zero-norm feature vector");
  const double es = 0.5 * (m.phi / nm - n.phi / nn).squaredNorm();
  const double etau = std::abs(m.tau - n.tau) / total_duration_s;
  return es * std::pow(etau, alpha);
}

namespace detail {

// Temporal processing order: by tau, ties by original position.
inline std::vector<std::size_t> temporal_order(const std::vector<ClipPoint>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].tau < points[b].tau; });
  return order;
}

// Canonicalize labels given in temporal order, then scatter them back to the
// original point positions. Contiguity is judged in temporal order.
inline Segmentation scatter_labels(const std::vector<int>& sorted_labels,
                                   const std::vector<std::size_t>& order) {
  Segmentation canon = Segmentation::from_labels(sorted_labels);
  Segmentation out;
  out.k = canon.k;
  out.contiguous = canon.contiguous;
  out.labels.resize(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) out.labels[order[p]] = canon.labels[p];
  return out;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

// 1-NN partition over points already in temporal order; returns labels in
// that order, canonicalized.
inline std::vector<int> one_nn_sorted(const std::vector<ClipPoint>& pts, double T, double alpha,
                                      bool shared_neighbor) {
  const std::size_t n = pts.size();
  if (n == 1) return {0};
  Eigen::MatrixXd nphi(n, pts[0].phi.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = pts[i].phi.norm();
    require(norm > 0.0, Errc::numeric, "zero-norm feature vector");
    nphi.row(static_cast<Eigen::Index>(i)) = pts[i].phi.transpose() / norm;
  }
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best_e = std::numeric_limits<double>::infinity();
    double best_gap = std::numeric_limits<double>::infinity();
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double es =
          0.5 * (nphi.row(static_cast<Eigen::Index>(i)) - nphi.row(static_cast<Eigen::Index>(j)))
                    .squaredNorm();
      const double gap = std::abs(pts[i].tau - pts[j].tau);
      const double e = es * std::pow(gap / T, alpha);
      if (e < best_e || (e == best_e && gap < best_gap)) {
        best_e = e;
        best_gap = gap;
        best = j;
      }
    }
    nn[i] = best;
  }
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) uf.unite(i, nn[i]);
  if (shared_neighbor)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (nn[i] == nn[j]) uf.unite(i, j);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(uf.find(i));
  return labels;  // caller canonicalizes
}

// Cluster representatives over temporally sorted originals: arithmetic mean
// of member phi and tau, weight = total member weight.
inline std::vector<ClipPoint> collapse_clusters(const std::vector<ClipPoint>& sorted_pts,
                                                const std::vector<int>& sorted_labels, int k) {
  std::vector<ClipPoint> reps(static_cast<std::size_t>(k));
  std::vector<double> wsum(static_cast<std::size_t>(k), 0.0);
  for (std::size_t c = 0; c < reps.size(); ++c) {
    reps[c].phi = Eigen::VectorXd::Zero(sorted_pts[0].phi.size());
    reps[c].tau = 0.0;
    reps[c].weight = 0;
  }
  for (std::size_t p = 0; p < sorted_pts.size(); ++p) {
    const auto c = static_cast<std::size_t>(sorted_labels[p]);
    const double w = sorted_pts[p].weight;
    reps[c].phi += w * sorted_pts[p].phi;
    reps[c].tau += w * sorted_pts[p].tau;
    reps[c].weight += sorted_pts[p].weight;
    wsum[c] += w;
  }
  for (std::size_t c = 0; c < reps.size(); ++c) {
    reps[c].phi /= wsum[c];
    reps[c].tau /= wsum[c];
  }
  return reps;
}

// Hierarchy in the temporally sorted domain: per-level canonical labels.
inline std::vector<std::vector<int>> hierarchy_sorted(const std::vector<ClipPoint>& sorted_pts,
                                                      double T, double alpha,
                                                      bool shared_neighbor) {
  std::vector<std::vector<int>> levels;
  std::vector<int> cur =
      Segmentation::from_labels(one_nn_sorted(sorted_pts, T, alpha, shared_neighbor)).labels;
  int k_cur = 1 + *std::max_element(cur.begin(), cur.end());
  levels.push_back(cur);
  while (k_cur > 1) {
    const std::vector<ClipPoint> reps = collapse_clusters(sorted_pts, cur, k_cur);
    const std::vector<int> sub =
        Segmentation::from_labels(one_nn_sorted(reps, T, alpha, shared_neighbor)).labels;
    std::vector<int> composed(cur.size());
    for (std::size_t p = 0; p < cur.size(); ++p)
      composed[p] = sub[static_cast<std::size_t>(cur[p])];
    composed = Segmentation::from_labels(std::move(composed)).labels;
    const int k_new = 1 + *std::max_element(composed.begin(), composed.end());
    if (k_new >= k_cur) break;
    levels.push_back(composed);
    cur = std::move(composed);
    k_cur = k_new;
  }
  return levels;
}

// Greedy merges of the min-E cluster pair until exactly K clusters remain.
// Ties: smaller temporal gap, then smaller cluster index pair.
inline std::vector<int> merge_to_k(const std::vector<ClipPoint>& sorted_pts,
                                   std::vector<int> labels, int k_cur, int K, double T,
                                   double alpha) {
  while (k_cur > K) {
    std::vector<ClipPoint> reps = collapse_clusters(sorted_pts, labels, k_cur);
    double best_e = std::numeric_limits<double>::infinity();
    double best_gap = std::numeric_limits<double>::infinity();
    int best_a = -1, best_b = -1;
    for (int a = 0; a < k_cur; ++a) {
      for (int b = a + 1; b < k_cur; ++b) {
        const double e = pair_distance(reps[static_cast<std::size_t>(a)],
                                       reps[static_cast<std::size_t>(b)], T, alpha);
        const double gap = std::abs(reps[static_cast<std::size_t>(a)].tau -
                                    reps[static_cast<std::size_t>(b)].tau);
        if (e < best_e || (e == best_e && gap < best_gap)) {
          best_e = e;
          best_gap = gap;
          best_a = a;
          best_b = b;
        }
      }
    }
    for (auto& l : labels)
      if (l == best_b) l = best_a;
    labels = Segmentation::from_labels(std::move(labels)).labels;
    --k_cur;
  }
  return labels;
}

}  // namespace detail

inline Segmentation one_nn_partition(const std::vector<ClipPoint>& points, double total_duration_s,
                                     double alpha, bool shared_neighbor = false) {
  require_valid(!points.empty(), "no points");
  require_valid(total_duration_s > 0.0, "total duration must be positive");
  const auto order = detail::temporal_order(points);
  std::vector<ClipPoint> sorted_pts(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted_pts[p] = points[order[p]];
  return detail::scatter_labels(
      detail::one_nn_sorted(sorted_pts, total_duration_s, alpha, shared_neighbor), order);
}

inline PartitionHierarchy build_hierarchy(const std::vector<ClipPoint>& points,
                                          double total_duration_s, double alpha,
                                          bool shared_neighbor = false) {
  require_valid(!points.empty(), "no points");
  require_valid(total_duration_s > 0.0, "total duration must be positive");
  const auto order = detail::temporal_order(points);
  std::vector<ClipPoint> sorted_pts(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted_pts[p] = points[order[p]];
  PartitionHierarchy out;
  for (auto& lv : detail::hierarchy_sorted(sorted_pts, total_duration_s, alpha, shared_neighbor))
    out.levels.push_back(detail::scatter_labels(lv, order));
  return out;
}

inline SegmentResult segment_exact_k(const std::vector<ClipPoint>& points,
                                     double total_duration_s, int K,
                                     const TwfinchConfig& cfg = {}) {
  validate_twfinch_config(cfg);
  require_valid(!points.empty(), "no points");
  require_valid(K >= 1, "K must be >= 1");
  require_valid(K <= static_cast<int>(points.size()), "K exceeds point count");
  require_valid(total_duration_s > 0.0, "total duration must be positive");

  const auto order = detail::temporal_order(points);
  std::vector<ClipPoint> sorted_pts(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted_pts[p] = points[order[p]];

  SegmentResult res;
  for (int step = 0;; ++step) {
    const double alpha = cfg.alpha_init + step * cfg.alpha_step;
    const auto levels =
        detail::hierarchy_sorted(sorted_pts, total_duration_s, alpha, cfg.shared_neighbor);
    // Coarsest level still holding >= K clusters; if even the finest level is
    // below K, fall back to the singleton partition.
    std::vector<int> base(points.size());
    int k_base = static_cast<int>(points.size());
    std::iota(base.begin(), base.end(), 0);
    for (const auto& lv : levels) {
      const int k_lv = 1 + *std::max_element(lv.begin(), lv.end());
      if (k_lv >= K) {
        base = lv;
        k_base = k_lv;
      } else {
        break;
      }
    }
    const std::vector<int> merged =
        detail::merge_to_k(sorted_pts, base, k_base, K, total_duration_s, alpha);
    res.seg = detail::scatter_labels(merged, order);
    res.alpha_used = alpha;
    if (!cfg.require_contiguous || res.seg.contiguous) return res;
    if (alpha + cfg.alpha_step > cfg.alpha_max + 1e-12) {
      res.warning = true;
      return res;
    }
  }
}

enum class AutoKLevel { second_last, third_last };

inline SegmentResult auto_k(const std::vector<ClipPoint>& points, double total_duration_s,
                            const TwfinchConfig& cfg, AutoKLevel which) {
  validate_twfinch_config(cfg);
  require_valid(!points.empty(), "no points");
  require_valid(total_duration_s > 0.0, "total duration must be positive");

  const auto order = detail::temporal_order(points);
  std::vector<ClipPoint> sorted_pts(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted_pts[p] = points[order[p]];

  const int back = which == AutoKLevel::second_last ? 2 : 3;
  SegmentResult res;
  for (int step = 0;; ++step) {
    const double alpha = cfg.alpha_init + step * cfg.alpha_step;
    const auto levels =
        detail::hierarchy_sorted(sorted_pts, total_duration_s, alpha, cfg.shared_neighbor);
    const int want = static_cast<int>(levels.size()) - back;
    const int idx = std::max(0, want);
    res.seg = detail::scatter_labels(levels[static_cast<std::size_t>(idx)], order);
    res.alpha_used = alpha;
    res.fallback = want < 0;
    if (!cfg.require_contiguous || res.seg.contiguous) return res;
    if (alpha + cfg.alpha_step > cfg.alpha_max + 1e-12) {
      res.warning = true;
      return res;
    }
  }
}

inline std::vector<ClipPoint> make_points(const std::vector<Eigen::VectorXd>& phis,
                                          const std::vector<double>& taus) {
  require_valid(phis.size() == taus.size(), "phi/tau length mismatch");
  std::vector<ClipPoint> pts(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) pts[i] = {phis[i], taus[i], 1};
  return pts;
}

}  // namespace avseg
