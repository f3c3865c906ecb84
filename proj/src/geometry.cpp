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

#include "probekit/geometry.h"

#include <algorithm>
#include <string>

#include "probekit/error.h"

namespace probekit {

FeatureSequence pair_downsample(const FeatureSequence& seq) {
  const Eigen::Index t = seq.frames();
  if (t < 2) {
    throw Error("pair_downsample needs at least 2 frames, got " + std::to_string(t));
  }
  const Eigen::Index d = seq.dim();
  FeatureSequence out;
  out.modality = seq.modality;
  out.fps = seq.fps / 2.0f;
  out.data.resize(t / 2, 2 * d);
  for (Eigen::Index k = 0; k < t / 2; ++k) {
    out.data.row(k).head(d) = seq.data.row(2 * k);
    out.data.row(k).tail(d) = seq.data.row(2 * k + 1);
  }
  return out;
}

std::pair<FeatureSequence, FeatureSequence> trim_align(const FeatureSequence& a,
                                                       const FeatureSequence& v) {
  if (a.frames() < 1 || v.frames() < 1) throw Error("trim_align needs non-empty streams");
  const Eigen::Index t = std::min(a.frames(), v.frames());
  FeatureSequence a_out = a;
  FeatureSequence v_out = v;
  a_out.data.conservativeResize(t, Eigen::NoChange);
  v_out.data.conservativeResize(t, Eigen::NoChange);
  return {std::move(a_out), std::move(v_out)};
}

std::vector<Window> chunk_windows(std::size_t frames, std::size_t window, std::size_t stride) {
  if (window < 1 || stride < 1) throw Error("chunk_windows needs window >= 1 and stride >= 1");
  std::vector<Window> windows;
  for (std::size_t start = 0; start + window <= frames; start += stride) {
    windows.push_back({start, start + window});
  }
  return windows;
}

std::vector<int> frame_labels(const std::vector<ManipulationSegment>& segments, std::size_t frames,
                              double fps) {
  if (!(fps > 0.0)) throw Error("frame_labels needs fps > 0");
  std::vector<int> labels(frames, 0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double mid = (static_cast<double>(t) + 0.5) / fps;
    for (const ManipulationSegment& seg : segments) {
      if (mid >= seg.start_s && mid < seg.end_s) {
        labels[t] = 1;
        break;
      }
    }
  }
  return labels;
}

}  // namespace probekit
