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

#include "probekit/synthetic.h"

#include <cmath>
#include <cstdio>
#include <set>

#include "probekit/error.h"

namespace probekit {
namespace {

FeatureSequence to_sequence(const Eigen::MatrixXd& x, Modality modality, double fps) {
  FeatureSequence seq;
  seq.modality = modality;
  seq.fps = static_cast<float>(fps);
  seq.data = x.cast<float>();
  return seq;
}

std::string numbered(std::string_view split, std::string_view kind, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return std::string(split) + "_" + std::string(kind) + "_" + buf;
}

std::size_t draw_length(const SynthSpec& spec, Rng& rng) {
  return spec.t_min + rng.index(spec.t_max - spec.t_min + 1);
}

Eigen::MatrixXd random_mixing(Rng& rng, Eigen::Index dim) {
  Eigen::MatrixXd m(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

Eigen::MatrixXd observe(const Eigen::MatrixXd& latent, const Eigen::MatrixXd& mixing,
                        double noise_std, Rng& rng) {
  Eigen::MatrixXd x = latent * mixing.transpose();
  if (noise_std > 0.0) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) += noise_std * rng.normal();
    }
  }
  return x;
}

}  // namespace

std::string_view fake_kind_name(FakeKind kind) {
  switch (kind) {
    case FakeKind::kMeanShift:
      return "mean_shift";
    case FakeKind::kResampleSegment:
      return "resample_segment";
    case FakeKind::kStreamShift:
      return "stream_shift";
    case FakeKind::kIndependentLatent:
      return "independent_latent";
  }
  return "unknown";
}

FakeKind parse_fake_kind(std::string_view name) {
  for (const FakeKind k : {FakeKind::kMeanShift, FakeKind::kResampleSegment,
                           FakeKind::kStreamShift, FakeKind::kIndependentLatent}) {
    if (fake_kind_name(k) == name) return k;
  }
  throw Error("unknown fake_kind '" + std::string(name) + "'");
}

bool is_pair_kind(FakeKind kind) {
  return kind == FakeKind::kStreamShift || kind == FakeKind::kIndependentLatent;
}

void validate(const SynthSpec& spec) {
  if (spec.n_real < 1 && spec.n_fake < 1) throw Error("synth spec needs at least one video");
  if (spec.dim < 1) throw Error("synth spec needs dim >= 1");
  if (spec.t_min < 1 || spec.t_max < spec.t_min) throw Error("synth spec needs 1 <= t_min <= t_max");
  if (!(spec.ar_coeff >= 0.0 && spec.ar_coeff < 1.0)) throw Error("ar_coeff must lie in [0, 1)");
  if (!(spec.segment_fraction > 0.0 && spec.segment_fraction <= 1.0)) {
    throw Error("segment_fraction must lie in (0, 1]");
  }
  if (!(spec.fps > 0.0)) throw Error("fps must be positive");
  if (!(spec.shift_magnitude >= 0.0)) throw Error("shift_magnitude must be >= 0");
  if (!(spec.noise_std >= 0.0)) throw Error("noise_std must be >= 0");
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "seed",  "n_real",           "n_fake",          "t_min",          "t_max",
      "dim",   "ar_coeff",         "fake_kind",       "shift_magnitude", "segment_fraction",
      "fps",   "noise_std",        "identity_mixing", "modality",        "splits"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error("unknown synth spec key '" + key + "'");
  }
  SynthSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.n_real = j.value("n_real", s.n_real);
    s.n_fake = j.value("n_fake", s.n_fake);
    s.t_min = j.value("t_min", s.t_min);
    s.t_max = j.value("t_max", s.t_max);
    s.dim = j.value("dim", s.dim);
    s.ar_coeff = j.value("ar_coeff", s.ar_coeff);
    if (j.contains("fake_kind")) s.fake_kind = parse_fake_kind(j.at("fake_kind").get<std::string>());
    s.shift_magnitude = j.value("shift_magnitude", s.shift_magnitude);
    s.segment_fraction = j.value("segment_fraction", s.segment_fraction);
    s.fps = j.value("fps", s.fps);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.identity_mixing = j.value("identity_mixing", s.identity_mixing);
    if (j.contains("modality")) s.modality = parse_modality(j.at("modality").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad synth spec: ") + e.what());
  }
  validate(s);
  return s;
}

nlohmann::json to_json(const SynthSpec& s) {
  return {{"seed", s.seed},
          {"n_real", s.n_real},
          {"n_fake", s.n_fake},
          {"t_min", s.t_min},
          {"t_max", s.t_max},
          {"dim", s.dim},
          {"ar_coeff", s.ar_coeff},
          {"fake_kind", fake_kind_name(s.fake_kind)},
          {"shift_magnitude", s.shift_magnitude},
          {"segment_fraction", s.segment_fraction},
          {"fps", s.fps},
          {"noise_std", s.noise_std},
          {"identity_mixing", s.identity_mixing},
          {"modality", modality_name(s.modality)}};
}

SynthWorld make_world(const SynthSpec& spec) {
  Rng rng = Rng(spec.seed).split("synth.world");
  SynthWorld world;
  world.shift_direction.resize(spec.dim);
  for (Eigen::Index i = 0; i < spec.dim; ++i) world.shift_direction(i) = rng.normal();
  world.shift_direction.normalize();
  if (spec.identity_mixing) {
    world.audio_mixing = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    world.visual_mixing = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
  } else {
    world.audio_mixing = random_mixing(rng, spec.dim);
    world.visual_mixing = random_mixing(rng, spec.dim);
  }
  return world;
}

Eigen::MatrixXd ar1_stream(Rng& rng, Eigen::Index frames, Eigen::Index dim, double rho) {
  Eigen::MatrixXd x(frames, dim);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double e = rng.normal();
      x(t, j) = t == 0 ? e : rho * x(t - 1, j) + innovation * e;
    }
  }
  return x;
}

SynthVideo gen_real_video(const SynthSpec& spec, Rng& rng, std::string id) {
  const auto frames = static_cast<Eigen::Index>(draw_length(spec, rng));
  SynthVideo video;
  video.record.id = std::move(id);
  video.record.label = 0;
  video.record.fps = spec.fps;
  const std::string key(modality_name(spec.modality));
  video.streams[key] =
      to_sequence(ar1_stream(rng, frames, spec.dim, spec.ar_coeff), spec.modality, spec.fps);
  return video;
}

SynthVideo gen_fake_from_real(const SynthVideo& real, const SynthSpec& spec,
                              const SynthWorld& world, Rng& rng, std::string id) {
  if (is_pair_kind(spec.fake_kind)) {
    throw Error("fake kind '" + std::string(fake_kind_name(spec.fake_kind)) +
                "' applies to audio/visual pairs; use gen_sync_pair");
  }
  if (real.streams.size() != 1) throw Error("gen_fake_from_real expects a single-stream video");
  const auto& [key, seq] = *real.streams.begin();
  const std::size_t frames = static_cast<std::size_t>(seq.frames());
  const double want = spec.segment_fraction * static_cast<double>(frames);
  if (want < 1.0) throw Error("segment_fraction * T must be >= 1");
  const std::size_t length = std::min(frames, static_cast<std::size_t>(std::llround(want)));
  const std::size_t start = rng.index(frames - length + 1);

  Eigen::MatrixXd x = seq.as_double();
  const auto first = static_cast<Eigen::Index>(start);
  const auto count = static_cast<Eigen::Index>(length);
  if (spec.fake_kind == FakeKind::kMeanShift) {
    x.middleRows(first, count).rowwise() +=
        (spec.shift_magnitude * world.shift_direction).transpose();
  } else {
    x.middleRows(first, count) = ar1_stream(rng, count, x.cols(), spec.ar_coeff);
  }

  SynthVideo fake;
  fake.record.id = std::move(id);
  fake.record.label = 1;
  fake.record.fps = spec.fps;
  fake.record.segments.push_back({static_cast<double>(start) / spec.fps,
                                  static_cast<double>(start + length) / spec.fps});
  fake.streams[key] = to_sequence(x, seq.modality, spec.fps);
  fake.mutated_first = start;
  fake.mutated_last = start + length;
  return fake;
}

SynthVideo gen_sync_pair(const SynthSpec& spec, const SynthWorld& world, Rng& rng, std::string id,
                         bool fake) {
  const auto frames = static_cast<Eigen::Index>(draw_length(spec, rng));
  const Eigen::Index delay =
      fake && spec.fake_kind == FakeKind::kStreamShift ? std::llround(spec.shift_magnitude) : 0;
  const Eigen::MatrixXd latent = ar1_stream(rng, frames + delay, spec.dim, spec.ar_coeff);

  Eigen::MatrixXd audio_latent = latent.bottomRows(frames);
  Eigen::MatrixXd visual_latent = latent.topRows(frames);
  if (fake && spec.fake_kind == FakeKind::kIndependentLatent) {
    visual_latent = ar1_stream(rng, frames, spec.dim, spec.ar_coeff);
  }

  SynthVideo video;
  video.record.id = std::move(id);
  video.record.label = fake ? 1 : 0;
  video.record.fps = spec.fps;
  if (fake) video.record.segments.push_back({0.0, static_cast<double>(frames) / spec.fps});
  video.streams["audio"] = to_sequence(
      observe(audio_latent, world.audio_mixing, spec.noise_std, rng), Modality::kAudio, spec.fps);
  video.streams["visual"] =
      to_sequence(observe(visual_latent, world.visual_mixing, spec.noise_std, rng),
                  Modality::kVisual, spec.fps);
  return video;
}

std::vector<SynthVideo> gen_split(const SynthSpec& spec, std::string_view split) {
  validate(spec);
  const SynthWorld world = make_world(spec);
  const Rng samples = Rng(spec.seed).split("synth.split." + std::string(split));
  std::vector<SynthVideo> videos;
  videos.reserve(spec.n_real + spec.n_fake);
  const bool pairs = is_pair_kind(spec.fake_kind);
  for (std::size_t i = 0; i < spec.n_real; ++i) {
    Rng rng = samples.split(2 * i);
    std::string id = numbered(split, "real", i);
    videos.push_back(pairs ? gen_sync_pair(spec, world, rng, std::move(id), false)
                           : gen_real_video(spec, rng, std::move(id)));
  }
  for (std::size_t i = 0; i < spec.n_fake; ++i) {
    Rng rng = samples.split(2 * i + 1);
    std::string id = numbered(split, "fake", i);
    if (pairs) {
      videos.push_back(gen_sync_pair(spec, world, rng, std::move(id), true));
    } else {
      const SynthVideo base = gen_real_video(spec, rng, id);
      videos.push_back(gen_fake_from_real(base, spec, world, rng, std::move(id)));
    }
  }
  return videos;
}

DatasetManifest write_split(const std::vector<SynthVideo>& videos,
                            const std::filesystem::path& out_dir, std::string_view split) {
  std::filesystem::create_directories(out_dir / "features");
  DatasetManifest manifest;
  for (const SynthVideo& video : videos) {
    VideoRecord record = video.record;
    for (const auto& [key, seq] : video.streams) {
      const std::filesystem::path path = out_dir / "features" / (record.id + "." + key + ".fseq");
      write_fseq(seq, path);
      record.features[key] = path;
    }
    manifest.records.push_back(std::move(record));
  }
  write_manifest(manifest, out_dir / (std::string(split) + ".jsonl"));
  return manifest;
}

DatasetManifest gen_dataset(const SynthSpec& spec, std::string_view split,
                            const std::filesystem::path& out_dir) {
  return write_split(gen_split(spec, split), out_dir, split);
}

DatasetManifest gen_real(const SynthSpec& spec, std::string_view split,
                         const std::filesystem::path& out_dir) {
  SynthSpec reals = spec;
  reals.n_fake = 0;
  return gen_dataset(reals, split, out_dir);
}

}  // namespace probekit
