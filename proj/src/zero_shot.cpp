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

#include "probekit/zero_shot.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "probekit/error.h"
#include "probekit/nn.h"

namespace probekit {
namespace {

double percentile(std::span<const double> values, std::size_t percent) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // ceil(percent * n / 100) - 1 in integer arithmetic.
  const std::size_t rank = (percent * n + 99) / 100;
  const std::size_t idx = rank == 0 ? 0 : std::min(rank - 1, n - 1);
  return sorted[idx];
}

// Calls fn on the series of every shift in [-delta_max, delta_max] with
// enough overlap.
template <typename Fn>
void for_each_shift(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v, int delta_max,
                    std::size_t min_overlap, Fn&& fn) {
  if (delta_max < 0) throw Error("delta_max must be >= 0");
  bool any = false;
  for (int shift = -delta_max; shift <= delta_max; ++shift) {
    const long lo = std::max<long>(0, -shift);
    const long hi = std::min<long>(a.rows(), v.rows() - shift);
    if (hi - lo < static_cast<long>(std::max<std::size_t>(min_overlap, 1))) continue;
    fn(neg_cos_series(a, v, shift, min_overlap));
    any = true;
  }
  if (!any) throw Error("insufficient overlap at every shift");
}

}  // namespace

std::string_view pool_name(PoolKind kind) {
  switch (kind) {
    case PoolKind::kAverage:
      return "average";
    case PoolKind::kMax:
      return "max";
    case PoolKind::kMin:
      return "min";
    case PoolKind::kLse:
      return "lse";
    case PoolKind::kScaledLse:
      return "scaled_lse";
    case PoolKind::kPercentile3:
      return "percentile_3";
    case PoolKind::kPercentile97:
      return "percentile_97";
  }
  return "unknown";
}

PoolKind parse_pool(std::string_view name) {
  for (const PoolKind kind : kAllPools) {
    if (pool_name(kind) == name) return kind;
  }
  throw Error("unknown pooling '" + std::string(name) + "'");
}

double pool(std::span<const double> values, PoolKind kind) {
  if (values.empty()) throw Error("pool of an empty series");
  // Scalar loops: a Map over caller memory would make vectorized sums depend
  // on the pointer's alignment.
  const double n = static_cast<double>(values.size());
  const double mx = *std::max_element(values.begin(), values.end());
  const auto lse_scaled = [&](double scale) {
    double acc = 0.0;
    for (double x : values) acc += std::exp(scale * (x - mx));
    return scale * mx + std::log(acc);
  };
  switch (kind) {
    case PoolKind::kAverage:
      return std::accumulate(values.begin(), values.end(), 0.0) / n;
    case PoolKind::kMax:
      return mx;
    case PoolKind::kMin:
      return *std::min_element(values.begin(), values.end());
    case PoolKind::kLse:
      return lse_scaled(1.0);
    case PoolKind::kScaledLse:
      return lse_scaled(n) / n;
    case PoolKind::kPercentile3:
      return percentile(values, 3);
    case PoolKind::kPercentile97:
      return percentile(values, 97);
  }
  throw Error("unknown pooling kind");
}

std::vector<double> neg_cos_series(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v, int shift,
                                   std::size_t min_overlap) {
  if (a.cols() != v.cols()) {
    throw Error("dimension mismatch: audio D=" + std::to_string(a.cols()) +
                ", visual D=" + std::to_string(v.cols()));
  }
  const long lo = std::max<long>(0, -shift);
  const long hi = std::min<long>(a.rows(), v.rows() - shift);
  const long overlap = std::max<long>(0, hi - lo);
  if (overlap < static_cast<long>(std::max<std::size_t>(min_overlap, 1))) {
    throw Error("insufficient overlap at shift " + std::to_string(shift) + ": " +
                std::to_string(overlap) + " frames");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(overlap));
  for (long t = lo; t < hi; ++t) {
    const auto at = a.row(t);
    const auto vt = v.row(t + shift);
    const double denom = at.norm() * vt.norm();
    out.push_back(denom > 0.0 ? -at.dot(vt) / denom : 0.0);
  }
  return out;
}

Eigen::MatrixXd standardize_frames(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::VectorXd var =
      centered.array().square().rowwise().sum() / static_cast<double>(x.cols());
  centered.array().colwise() *= (var.array() + kLayerNormEps).rsqrt();
  return centered;
}

double zero_shot_score(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                       const ZeroShotConfig& cfg) {
  const Eigen::MatrixXd aa = cfg.layer_norm ? standardize_frames(a) : a;
  const Eigen::MatrixXd vv = cfg.layer_norm ? standardize_frames(v) : v;
  double best = std::numeric_limits<double>::infinity();
  for_each_shift(aa, vv, cfg.delta_max, cfg.min_overlap,
                 [&](const std::vector<double>& series) { best = std::min(best, pool(series, cfg.pool)); });
  return best;
}

std::vector<std::vector<double>> zero_shot_grid(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                                                std::span<const int> deltas,
                                                std::size_t min_overlap, bool layer_norm) {
  const Eigen::MatrixXd aa = layer_norm ? standardize_frames(a) : a;
  const Eigen::MatrixXd vv = layer_norm ? standardize_frames(v) : v;
  std::vector<std::vector<double>> grid(kAllPools.size(),
                                        std::vector<double>(deltas.size()));
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    std::vector<double> best(kAllPools.size(), std::numeric_limits<double>::infinity());
    for_each_shift(aa, vv, deltas[d], min_overlap, [&](const std::vector<double>& series) {
      for (std::size_t p = 0; p < kAllPools.size(); ++p) {
        best[p] = std::min(best[p], pool(series, kAllPools[p]));
      }
    });
    for (std::size_t p = 0; p < kAllPools.size(); ++p) grid[p][d] = best[p];
  }
  return grid;
}

}  // namespace probekit
