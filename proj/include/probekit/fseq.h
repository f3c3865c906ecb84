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

// FSEQ: the on-disk container for one T x D stream of per-frame embeddings.
//
// Layout (all integers and floats little-endian):
//   0..3   magic "FSEQ"
//   4      version (1)
//   5      modality (0 audio, 1 visual, 2 multimodal)
//   6..7   reserved, zero
//   8..11  T, u32
//   12..15 D, u32
//   16..19 fps, f32
//   20..   T*D f32 values, row-major

#ifndef PROBEKIT_FSEQ_H_
#define PROBEKIT_FSEQ_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace probekit {

enum class Modality : std::uint8_t { kAudio = 0, kVisual = 1, kMultimodal = 2 };

std::string_view modality_name(Modality modality);
// Accepts "audio", "visual", "multimodal"; throws Error otherwise.
Modality parse_modality(std::string_view name);

using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureSequence {
  Modality modality = Modality::kVisual;
  float fps = 25.0f;
  FrameMatrix data;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
  Eigen::MatrixXd as_double() const { return data.cast<double>(); }
};

// Shape, metadata, and payload compared bit for bit.
bool bit_equal(const FeatureSequence& a, const FeatureSequence& b);

// Throws FseqError if T or D is zero, fps is not a positive finite number,
// or the payload contains NaN/Inf.
void validate(const FeatureSequence& seq);

inline constexpr std::size_t kFseqHeaderBytes = 20;
inline constexpr std::uint8_t kFseqVersion = 1;

std::vector<std::uint8_t> encode_fseq(const FeatureSequence& seq);
FeatureSequence decode_fseq(std::span<const std::uint8_t> bytes);

void write_fseq(const FeatureSequence& seq, const std::filesystem::path& path);
FeatureSequence read_fseq(const std::filesystem::path& path);

}  // namespace probekit

#endif  // PROBEKIT_FSEQ_H_
