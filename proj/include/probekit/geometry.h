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

#ifndef PROBEKIT_GEOMETRY_H_
#define PROBEKIT_GEOMETRY_H_

#include <cstddef>
#include <utility>
#include <vector>

#include "probekit/fseq.h"

namespace probekit {

struct ManipulationSegment {
  double start_s = 0.0;
  double end_s = 0.0;
};

// Halves the frame rate by concatenating consecutive frame pairs:
// output row k is [row 2k | row 2k+1]. A trailing odd frame is dropped.
// Requires T >= 2.
FeatureSequence pair_downsample(const FeatureSequence& seq);

// Truncates both streams at the end to the shorter length.
std::pair<FeatureSequence, FeatureSequence> trim_align(const FeatureSequence& a,
                                                       const FeatureSequence& v);

struct Window {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const Window&) const = default;
};

// Windows [k*stride, k*stride + window) lying wholly inside [0, T).
std::vector<Window> chunk_windows(std::size_t frames, std::size_t window, std::size_t stride);

// Frame t is fake iff its midpoint (t + 0.5) / fps falls in some
// half-open segment [start_s, end_s).
std::vector<int> frame_labels(const std::vector<ManipulationSegment>& segments, std::size_t frames,
                              double fps);

}  // namespace probekit

#endif  // PROBEKIT_GEOMETRY_H_
