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

// Per-video prediction files, JSON Lines:
//   {"id": "v001", "score": 3.2, "prob": 0.96, "frame_scores": [...]}
// "prob" and "frame_scores" are optional; anomaly scorers emit only
// {"id", "score"}.

#ifndef PROBEKIT_PREDICTIONS_H_
#define PROBEKIT_PREDICTIONS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace probekit {

struct Prediction {
  std::string id;
  double score = 0.0;
  std::optional<double> prob;
  std::vector<double> frame_scores;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::vector<Prediction>& predictions,
                       const std::filesystem::path& path);

}  // namespace probekit

#endif  // PROBEKIT_PREDICTIONS_H_
