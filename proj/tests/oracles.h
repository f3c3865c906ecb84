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

// Brute-force reference implementations shared by the unit and acceptance
// tests. Each one is written from the definition, independently of the
// library code it checks.

#ifndef PROBEKIT_TESTS_ORACLES_H_
#define PROBEKIT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace probekit::oracle {

// Pair counting: fraction of (fake, real) pairs ranked correctly, ties
// counted as half. Returned as an exact ratio numerator / denominator.
struct PairCount {
  long long twice_wins = 0;  // 2 * wins + ties
  long long pairs = 0;
  double value() const { return 0.5 * static_cast<double>(twice_wins) / static_cast<double>(pairs); }
};

inline PairCount auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  PairCount c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++c.pairs;
      if (s[i] > s[j]) c.twice_wins += 2;
      if (s[i] == s[j]) c.twice_wins += 1;
    }
  }
  return c;
}

inline double auc(const std::vector<double>& s, const std::vector<int>& y) {
  return auc_pairs(s, y).value();
}

// Sweep every distinct score as a threshold, from high to low, and sum
// precision times the recall increment at each one.
inline double average_precision(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double positives = 0;
  for (int v : y) positives += v;
  double ap = 0.0;
  double prev_recall = 0.0;
  for (double th : thresholds) {
    double tp = 0, predicted = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= th) {
        predicted += 1;
        tp += y[i];
      }
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return cov / std::sqrt(vx * vy);
}

inline double lse(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace probekit::oracle

#endif  // PROBEKIT_TESTS_ORACLES_H_
