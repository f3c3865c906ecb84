// Copyright 2026 The probekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probekit/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "probekit/error.h"

namespace probekit {
namespace {

void check_labeled(const LabeledScores& ls) {
  if (ls.scores.size() != ls.labels.size()) throw Error("scores and labels differ in length");
  for (const int l : ls.labels) {
    if (l != 0 && l != 1) throw Error("labels must be 0 or 1");
  }
  for (const double s : ls.scores) {
    if (!std::isfinite(s)) throw Error("non-finite score");
  }
}

std::vector<std::size_t> order_by_score(const std::vector<double>& scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double roc_auc(const LabeledScores& ls) {
  check_labeled(ls);
  const std::size_t n = ls.scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(ls.labels.begin(), ls.labels.end(), 1));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("degenerate labels: AUC needs both classes");

  // Ranks are 1-based; a tie group spanning ranks [lo+1, hi] gets (lo+1+hi)/2.
  const std::vector<std::size_t> order = order_by_score(ls.scores, false);
  double pos_rank_sum = 0.0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && ls.scores[order[hi]] == ls.scores[order[lo]]) ++hi;
    const double rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (ls.labels[order[k]] == 1) pos_rank_sum += rank;
    }
    lo = hi;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double average_precision(const LabeledScores& ls) {
  check_labeled(ls);
  const std::size_t n = ls.scores.size();
  const auto n_pos = static_cast<std::size_t>(std::count(ls.labels.begin(), ls.labels.end(), 1));
  if (n_pos == 0) throw Error("average precision needs at least one positive");

  const std::vector<std::size_t> order = order_by_score(ls.scores, true);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi < n && ls.scores[order[hi]] == ls.scores[order[lo]]) {
      tp += static_cast<std::size_t>(ls.labels[order[hi]]);
      ++hi;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(hi);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    lo = hi;
  }
  return ap;
}

LocalizationResult localization_auc(std::span<const FrameLevel> videos) {
  LocalizationResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const FrameLevel& v = videos[i];
    if (v.frame_scores.size() != v.frame_labels.size()) {
      throw Error("video " + std::to_string(i) + ": frame scores and labels differ in length");
    }
    const auto fakes = std::count(v.frame_labels.begin(), v.frame_labels.end(), 1);
    if (fakes == 0) throw Error("video " + std::to_string(i) + " has no fake frames");
    if (static_cast<std::size_t>(fakes) == v.frame_labels.size()) {
      ++result.videos_skipped_all_fake;
      continue;
    }
    sum += roc_auc({v.frame_scores, v.frame_labels});
    ++result.videos_used;
  }
  if (result.videos_used == 0) throw Error("localization AUC: no video has both real and fake frames");
  result.auc = sum / static_cast<double>(result.videos_used);
  return result;
}

double mae_alignment(std::span<const Point2> pred, std::span<const Point2> truth) {
  if (pred.size() != truth.size()) throw Error("mae_alignment: length mismatch");
  if (pred.empty()) throw Error("mae_alignment: no points");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += 0.5 * (std::abs(pred[i].x - truth[i].x) + std::abs(pred[i].y - truth[i].y));
  }
  return sum / static_cast<double>(pred.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> late_fuse(const std::vector<std::vector<double>>& prob_lists) {
  if (prob_lists.empty()) throw Error("late_fuse needs at least one list");
  const std::size_t n = prob_lists.front().size();
  std::vector<double> fused(n, 0.0);
  for (const std::vector<double>& probs : prob_lists) {
    if (probs.size() != n) throw Error("late_fuse: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
        throw Error("late_fuse: probability out of range [0, 1]");
      }
      fused[i] += probs[i];
    }
  }
  for (double& f : fused) f /= static_cast<double>(prob_lists.size());
  return fused;
}

}  // namespace probekit
