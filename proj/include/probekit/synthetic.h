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

// Seeded generators of small feature datasets with known ground truth.
//
// Real streams are stationary AR(1): x_t = rho x_{t-1} + sqrt(1 - rho^2) e_t
// with standard normal e_t, so every frame is marginally N(0, I). Fakes are
// derived per kind:
//   mean_shift        adds shift_magnitude * u inside one random segment,
//                     where u is a unit direction fixed by the dataset seed
//   resample_segment  replaces a random segment with a fresh AR(1) stream
//   stream_shift      audio/visual pair with the visual stream delayed by
//                     round(shift_magnitude) frames
//   independent_latent audio/visual pair driven by unrelated latents
//
// Dataset-level structure (the shift direction and mixing maps) depends only
// on `seed`; per-split samples come from independent streams, so train, val,
// and test splits generated from one spec share that structure.

#ifndef PROBEKIT_SYNTHETIC_H_
#define PROBEKIT_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "probekit/fseq.h"
#include "probekit/manifest.h"
#include "probekit/rng.h"

namespace probekit {

enum class FakeKind { kMeanShift, kResampleSegment, kStreamShift, kIndependentLatent };

std::string_view fake_kind_name(FakeKind kind);
FakeKind parse_fake_kind(std::string_view name);
// True for the audio/visual pair kinds.
bool is_pair_kind(FakeKind kind);

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t n_real = 100;
  std::size_t n_fake = 100;
  std::size_t t_min = 50;
  std::size_t t_max = 150;
  Eigen::Index dim = 16;
  double ar_coeff = 0.9;
  FakeKind fake_kind = FakeKind::kMeanShift;
  double shift_magnitude = 2.0;
  double segment_fraction = 0.6;
  double fps = 25.0;
  // Pair kinds only: observation noise and whether both mixing maps are I.
  double noise_std = 0.1;
  bool identity_mixing = false;
  // Stream key and modality tag of single-stream datasets.
  Modality modality = Modality::kVisual;
};

void validate(const SynthSpec& spec);
// Missing keys keep their defaults; unknown keys are rejected.
SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);

struct SynthWorld {
  Eigen::VectorXd shift_direction;  // unit norm
  Eigen::MatrixXd audio_mixing;     // D x D
  Eigen::MatrixXd visual_mixing;    // D x D
};

SynthWorld make_world(const SynthSpec& spec);

struct SynthVideo {
  VideoRecord record;
  std::map<std::string, FeatureSequence> streams;
  // Mutated frame range [first, last) for segment fakes; empty otherwise.
  std::size_t mutated_first = 0;
  std::size_t mutated_last = 0;
};

Eigen::MatrixXd ar1_stream(Rng& rng, Eigen::Index frames, Eigen::Index dim, double rho);

SynthVideo gen_real_video(const SynthSpec& spec, Rng& rng, std::string id);
SynthVideo gen_fake_from_real(const SynthVideo& real, const SynthSpec& spec,
                              const SynthWorld& world, Rng& rng, std::string id);
SynthVideo gen_sync_pair(const SynthSpec& spec, const SynthWorld& world, Rng& rng, std::string id,
                         bool fake);

// In-memory split: n_real real videos then n_fake fakes, ids
// "<split>_real_0000" / "<split>_fake_0000".
std::vector<SynthVideo> gen_split(const SynthSpec& spec, std::string_view split);

// Writes every stream to <out_dir>/features/<id>.<key>.fseq and the manifest
// to <out_dir>/<split>.jsonl; returns the manifest with resolved paths.
DatasetManifest write_split(const std::vector<SynthVideo>& videos,
                            const std::filesystem::path& out_dir, std::string_view split);

DatasetManifest gen_dataset(const SynthSpec& spec, std::string_view split,
                            const std::filesystem::path& out_dir);

// Real-only dataset (n_fake ignored).
DatasetManifest gen_real(const SynthSpec& spec, std::string_view split,
                         const std::filesystem::path& out_dir);

}  // namespace probekit

#endif  // PROBEKIT_SYNTHETIC_H_
