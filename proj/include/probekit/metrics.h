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

#ifndef PROBEKIT_METRICS_H_
#define PROBEKIT_METRICS_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace probekit {

// Parallel score/label vectors; label 1 is the positive (fake) class.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Mann-Whitney statistic with average ranks for ties:
// P(score_pos > score_neg) + P(tie) / 2.
double roc_auc(const LabeledScores& ls);

// Step-wise AP, sum_k (R_k - R_{k-1}) P_k over descending distinct
// thresholds; tied scores form one threshold.
double average_precision(const LabeledScores& ls);

struct LocalizationResult {
  double auc = 0.0;
  std::size_t videos_used = 0;
  std::size_t videos_skipped_all_fake = 0;
};

struct FrameLevel {
  std::vector<double> frame_scores;
  std::vector<int> frame_labels;
};

// Unweighted mean of per-video frame-level AUC. Videos with no real frames
// are skipped and counted; a video with no fake frames is an error.
LocalizationResult localization_auc(std::span<const FrameLevel> videos);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Mean over points of (|dx| + |dy|) / 2.
double mae_alignment(std::span<const Point2> pred, std::span<const Point2> truth);

double pearson(std::span<const double> x, std::span<const double> y);

// Element-wise mean of k equally long probability lists.
std::vector<double> late_fuse(const std::vector<std::vector<double>>& prob_lists);

}  // namespace probekit

#endif  // PROBEKIT_METRICS_H_
