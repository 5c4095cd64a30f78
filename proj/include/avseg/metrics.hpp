#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "avseg/errors.hpp"
#include "avseg/types.hpp"

namespace avseg {

// Labels on a 1-second frame grid over [0, floor(T)). Frame f is labeled by
// the clip covering its midpoint f + 0.5; frames in gaps (or before the first
// clip) take the nearest preceding clip, or the first clip.
inline std::vector<int> frame_labeling(const Lecture& lec, const Segmentation& seg) {
  require_valid(seg.labels.size() == lec.clips.size(), "segmentation length != clip count");
  const int n_frames = static_cast<int>(std::floor(lec.total_duration_s));
  require_valid(n_frames >= 1, "lecture shorter than one frame");
  std::vector<int> frames(static_cast<std::size_t>(n_frames));
  std::size_t clip = 0;
  for (int f = 0; f < n_frames; ++f) {
    const double mid = f + 0.5;
    while (clip + 1 < lec.clips.size() && lec.clips[clip + 1].start_s <= mid) ++clip;
    frames[static_cast<std::size_t>(f)] = seg.labels[clip];
  }
  return frames;
}

namespace detail {

inline std::vector<std::vector<double>> contingency(const std::vector<int>& a,
                                                    const std::vector<int>& b) {
  int ka = 0, kb = 0;
  for (int x : a) ka = std::max(ka, x + 1);
  for (int x : b) kb = std::max(kb, x + 1);
  std::vector<std::vector<double>> table(static_cast<std::size_t>(ka),
                                         std::vector<double>(static_cast<std::size_t>(kb), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1.0;
  return table;
}

// Min-cost perfect assignment on a square cost matrix (potentials method);
// returns col_of_row.
inline std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0),
      v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      col_of_row[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return col_of_row;
}

}  // namespace detail

// Best one-to-one pred-cluster <-> gt-segment matching by total frame
// overlap (Hungarian on the padded contingency table).
// Returns gt index matched to each pred cluster, -1 when unmatched.
inline std::vector<int> max_overlap_matching(const std::vector<std::vector<double>>& table) {
  const int n_pred = static_cast<int>(table.size());
  const int n_gt = static_cast<int>(table[0].size());
  const int s = std::max(n_pred, n_gt);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(s),
                                        std::vector<double>(static_cast<std::size_t>(s), 0.0));
  for (int i = 0; i < n_pred; ++i)
    for (int j = 0; j < n_gt; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          -table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const std::vector<int> col_of_row = detail::hungarian_min_cost(cost);
  std::vector<int> match(static_cast<std::size_t>(n_pred), -1);
  for (int i = 0; i < n_pred; ++i)
    if (col_of_row[static_cast<std::size_t>(i)] < n_gt)
      match[static_cast<std::size_t>(i)] = col_of_row[static_cast<std::size_t>(i)];
  return match;
}

inline double nmi(const std::vector<int>& pred, const std::vector<int>& gt) {
  require_valid(pred.size() == gt.size(), "frame label length mismatch");
  require_valid(!pred.empty(), "empty frame labeling");
  const auto table = detail::contingency(pred, gt);
  const double n = static_cast<double>(pred.size());
  std::vector<double> rows(table.size(), 0.0), cols(table[0].size(), 0.0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[0].size(); ++j) {
      rows[i] += table[i][j];
      cols[j] += table[i][j];
    }
  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double hp = entropy(rows), hg = entropy(cols);
  if (hp == 0.0 && hg == 0.0) return 1.0;  // both single-cluster: identical partitions
  if (hp == 0.0 || hg == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[0].size(); ++j)
      if (table[i][j] > 0.0)
        mi += (table[i][j] / n) * std::log(n * table[i][j] / (rows[i] * cols[j]));
  return mi / (0.5 * (hp + hg));
}

struct OverlapMetrics {
  double mof = 0.0;
  double iou = 0.0;
  double f1 = 0.0;
};

inline OverlapMetrics matched_overlap_metrics(const std::vector<int>& pred,
                                              const std::vector<int>& gt) {
  require_valid(pred.size() == gt.size(), "frame label length mismatch");
  require_valid(!pred.empty(), "empty frame labeling");
  const auto table = detail::contingency(pred, gt);
  const std::size_t n_pred = table.size(), n_gt = table[0].size();
  const std::vector<int> match = max_overlap_matching(table);

  std::vector<double> pred_size(n_pred, 0.0), gt_size(n_gt, 0.0);
  for (std::size_t i = 0; i < n_pred; ++i)
    for (std::size_t j = 0; j < n_gt; ++j) {
      pred_size[i] += table[i][j];
      gt_size[j] += table[i][j];
    }

  OverlapMetrics out;
  std::vector<double> gt_iou(n_gt, 0.0), gt_f1(n_gt, 0.0);
  double matched_total = 0.0;
  for (std::size_t i = 0; i < n_pred; ++i) {
    if (match[i] < 0) continue;
    const auto j = static_cast<std::size_t>(match[i]);
    const double inter = table[i][j];
    const double uni = pred_size[i] + gt_size[j] - inter;
    matched_total += inter;
    gt_iou[j] = uni > 0.0 ? inter / uni : 0.0;
    gt_f1[j] = pred_size[i] + gt_size[j] > 0.0 ? 2.0 * inter / (pred_size[i] + gt_size[j]) : 0.0;
  }
  out.mof = matched_total / static_cast<double>(pred.size());
  for (std::size_t j = 0; j < n_gt; ++j) {
    out.iou += gt_iou[j] / static_cast<double>(n_gt);
    out.f1 += gt_f1[j] / static_cast<double>(n_gt);
  }
  return out;
}

// Recall of ground-truth boundaries: each GT boundary greedily grabs the
// nearest still-unmatched prediction within +-k_s seconds.
inline double boundary_score(const std::vector<double>& pred_boundaries_s,
                             const std::vector<double>& gt_boundaries_s, double k_s) {
  require_valid(std::is_sorted(pred_boundaries_s.begin(), pred_boundaries_s.end()),
                "predicted boundaries not sorted");
  require_valid(std::is_sorted(gt_boundaries_s.begin(), gt_boundaries_s.end()),
                "ground-truth boundaries not sorted");
  require_valid(k_s >= 0.0, "tolerance must be >= 0");
  if (gt_boundaries_s.empty() && pred_boundaries_s.empty()) return 100.0;
  std::vector<char> used(pred_boundaries_s.size(), 0);
  int matched = 0;
  for (double g : gt_boundaries_s) {
    int best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pred_boundaries_s.size(); ++p) {
      if (used[p]) continue;
      const double gap = std::abs(pred_boundaries_s[p] - g);
      if (gap <= k_s && gap < best_gap) {
        best_gap = gap;
        best = static_cast<int>(p);
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = 1;
      ++matched;
    }
  }
  return 100.0 * matched / std::max<std::size_t>(1, gt_boundaries_s.size());
}

struct MetricReport {
  double nmi = 0.0;
  double mof = 0.0;
  double iou = 0.0;
  double f1 = 0.0;
  std::map<int, double> bs_at;
};

inline MetricReport evaluate(const Segmentation& pred, const Segmentation& gt,
                             const Lecture& lec, const std::vector<int>& k_list = {30}) {
  const std::vector<int> pf = frame_labeling(lec, pred);
  const std::vector<int> gf = frame_labeling(lec, gt);
  MetricReport rep;
  rep.nmi = nmi(pf, gf);
  const OverlapMetrics om = matched_overlap_metrics(pf, gf);
  rep.mof = om.mof;
  rep.iou = om.iou;
  rep.f1 = om.f1;
  const std::vector<double> pb = boundaries_from_segmentation(lec, pred);
  const std::vector<double> gb = boundaries_from_segmentation(lec, gt);
  for (int k : k_list) rep.bs_at[k] = boundary_score(pb, gb, k);
  return rep;
}

inline MetricReport mean_report(const std::vector<MetricReport>& reports) {
  require_valid(!reports.empty(), "no reports to average");
  MetricReport mean;
  for (const auto& r : reports) {
    mean.nmi += r.nmi;
    mean.mof += r.mof;
    mean.iou += r.iou;
    mean.f1 += r.f1;
    for (const auto& [k, v] : r.bs_at) mean.bs_at[k] += v;
  }
  const double n = static_cast<double>(reports.size());
  mean.nmi /= n;
  mean.mof /= n;
  mean.iou /= n;
  mean.f1 /= n;
  for (auto& [k, v] : mean.bs_at) v /= n;
  return mean;
}

// Aligned text table, percent values with one decimal, columns
// NMI MoF IoU F1 then BS@k for each tolerance present.
inline std::string format_report_table(
    const std::vector<std::pair<std::string, MetricReport>>& rows) {
  require_valid(!rows.empty(), "no rows to format");
  std::vector<std::string> headers = {"NMI", "MoF", "IoU", "F1"};
  for (const auto& [k, v] : rows.front().second.bs_at)
    headers.push_back("BS@" + std::to_string(k));
  std::size_t name_w = 6;
  for (const auto& [name, rep] : rows) name_w = std::max(name_w, name.size());

  auto cell = [](double percent) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7.1f", percent);
    return std::string(buf);
  };
  std::string out(name_w, ' ');
  for (const auto& h : headers) out += "  " + std::string(7 - std::min<std::size_t>(7, h.size()), ' ') + h;
  out += '\n';
  for (const auto& [name, rep] : rows) {
    out += name + std::string(name_w - name.size(), ' ');
    out += "  " + cell(100.0 * rep.nmi);
    out += "  " + cell(100.0 * rep.mof);
    out += "  " + cell(100.0 * rep.iou);
    out += "  " + cell(100.0 * rep.f1);
    for (const auto& [k, v] : rep.bs_at) out += "  " + cell(v);
    out += '\n';
  }
  return out;
}

}  // namespace avseg
