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

// Explanations for linear probes: per-frame logits over time, patch-level
// class activation maps when the frame embedding is a mean of patch
// embeddings, and peak extraction from spatial saliency maps.

#ifndef PROBEKIT_EXPLANATIONS_H_
#define PROBEKIT_EXPLANATIONS_H_

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "probekit/fseq.h"
#include "probekit/probe.h"

namespace probekit {

struct FrameExplanation {
  double time_s = 0.0;  // frame midpoint
  double score = 0.0;
  double prob = 0.5;
};

std::vector<FrameExplanation> temporal_explanation(const LinearProbe& probe,
                                                   const FeatureSequence& seq);

// T frames of P = rows * cols patch embeddings of width D, patch p at grid
// cell (p / cols, p % cols).
struct PatchFeatureSequence {
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
  std::vector<Eigen::MatrixXd> frames;  // each P x D

  Eigen::Index patches() const { return rows * cols; }
};

// Frame-mean embedding of every frame (T x D); what the probe scores when the
// backbone pools patches by averaging.
Eigen::MatrixXd mean_pool(const PatchFeatureSequence& pseq);

// map[t](i, j) = w . phi_{t, i*cols + j}, bias excluded, so the mean of
// map[t] plus the bias equals the frame logit of the mean-pooled embedding.
std::vector<Eigen::MatrixXd> patch_cam(const LinearProbe& probe, const PatchFeatureSequence& pseq);

struct SaliencyMap {
  Eigen::Index frame_index = 0;
  Eigen::MatrixXd grid;  // H x W, non-negative
};

struct RelativePoint {
  double x = 0.5;  // columns, rightward
  double y = 0.5;  // rows, downward

  bool operator==(const RelativePoint&) const = default;
};

// Cell centre ((j + 0.5) / W, (i + 0.5) / H) of the maximum entry; ties go to
// the first cell in row-major order.
RelativePoint saliency_peak(const SaliencyMap& map);

// Saliency maps stored as an FSEQ of T x (H*W) rows (row-major cells) with a
// sidecar JSON {"h": H, "w": W} at `<path>.json`.
std::vector<SaliencyMap> read_saliency(const std::filesystem::path& path);
void write_saliency(const std::vector<SaliencyMap>& maps, const std::filesystem::path& path,
                    float fps = 25.0f);

// Patch features stored as an FSEQ of T x (P*D) rows, patch-major, with the
// same {"h", "w"} sidecar.
PatchFeatureSequence read_patch_features(const std::filesystem::path& path);
void write_patch_features(const PatchFeatureSequence& pseq, const std::filesystem::path& path,
                          float fps = 25.0f);

}  // namespace probekit

#endif  // PROBEKIT_EXPLANATIONS_H_
