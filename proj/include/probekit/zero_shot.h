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

// Training-free audio-visual synchronization scoring over jointly trained
// features:
//
//   s(a, v) = min over delta in [-D, +D] of pool_t( -cos(a_t, v_{t+delta}) )
//
// Shifts use only the valid overlap of the two streams. Common settings are
// D = 0 with 97th percentile pooling and D = 15 with average pooling.

#ifndef PROBEKIT_ZERO_SHOT_H_
#define PROBEKIT_ZERO_SHOT_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace probekit {

enum class PoolKind { kAverage, kMax, kMin, kLse, kScaledLse, kPercentile3, kPercentile97 };

inline constexpr std::array<PoolKind, 7> kAllPools = {
    PoolKind::kAverage,   PoolKind::kMax,         PoolKind::kMin,         PoolKind::kLse,
    PoolKind::kScaledLse, PoolKind::kPercentile3, PoolKind::kPercentile97};

std::string_view pool_name(PoolKind kind);
PoolKind parse_pool(std::string_view name);

// scaled_lse is (1/T) * lse(T * x). Percentiles use nearest rank on the
// ascending sort: index ceil(q * T) - 1, clamped to [0, T - 1].
double pool(std::span<const double> values, PoolKind kind);

// -cos(a_t, v_{t+shift}) over the overlap {t : 0 <= t < Ta, 0 <= t + shift < Tv}.
// A zero vector has cosine 0 with everything. Throws if the overlap has
// fewer than min_overlap frames.
std::vector<double> neg_cos_series(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v, int shift,
                                   std::size_t min_overlap = 1);

struct ZeroShotConfig {
  int delta_max = 0;
  PoolKind pool = PoolKind::kAverage;
  std::size_t min_overlap = 1;
  // Standardize each frame across its dimensions (no affine) before the
  // cosine, for layer dumps taken before the backbone's final LayerNorm.
  bool layer_norm = false;
};

double zero_shot_score(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                       const ZeroShotConfig& cfg);

// Scores for every (pool, delta) combination; result[p][d] pairs
// kAllPools[p] with deltas[d].
std::vector<std::vector<double>> zero_shot_grid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                                                std::span<const int> deltas,
                                                std::size_t min_overlap = 1,
                                                bool layer_norm = false);

Eigen::MatrixXd standardize_frames(const Eigen::MatrixXd& x);

}  // namespace probekit

#endif  // PROBEKIT_ZERO_SHOT_H_
