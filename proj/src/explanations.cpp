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

#include "probekit/explanations.h"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "probekit/error.h"
#include "probekit/nn.h"

namespace probekit {
namespace {

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

std::pair<Eigen::Index, Eigen::Index> read_grid(const std::filesystem::path& path) {
  std::ifstream in(sidecar(path));
  if (!in) throw Error("missing grid sidecar " + sidecar(path).string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    const auto h = j.at("h").get<Eigen::Index>();
    const auto w = j.at("w").get<Eigen::Index>();
    if (h < 1 || w < 1) throw Error("grid sidecar needs h, w >= 1");
    return {h, w};
  } catch (const nlohmann::json::exception& e) {
    throw Error(sidecar(path).string() + ": " + e.what());
  }
}

void write_grid(const std::filesystem::path& path, Eigen::Index h, Eigen::Index w) {
  std::ofstream out(sidecar(path), std::ios::trunc);
  if (!out) throw Error("cannot write " + sidecar(path).string());
  out << nlohmann::json{{"h", h}, {"w", w}}.dump() << '\n';
}

}  // namespace

std::vector<FrameExplanation> temporal_explanation(const LinearProbe& probe,
                                                   const FeatureSequence& seq) {
  const Eigen::VectorXd scores = frame_scores(probe, seq);
  std::vector<FrameExplanation> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index t = 0; t < scores.size(); ++t) {
    out[t].time_s = (static_cast<double>(t) + 0.5) / static_cast<double>(seq.fps);
    out[t].score = scores(t);
    out[t].prob = sigmoid(scores(t));
  }
  return out;
}

Eigen::MatrixXd mean_pool(const PatchFeatureSequence& pseq) {
  if (pseq.frames.empty()) throw Error("patch sequence has no frames");
  const Eigen::Index dim = pseq.frames.front().cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pseq.frames.size()), dim);
  for (std::size_t t = 0; t < pseq.frames.size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = pseq.frames[t].colwise().mean();
  }
  return out;
}

std::vector<Eigen::MatrixXd> patch_cam(const LinearProbe& probe,
                                       const PatchFeatureSequence& pseq) {
  const Eigen::VectorXd w = probe.weights();
  std::vector<Eigen::MatrixXd> maps;
  maps.reserve(pseq.frames.size());
  for (const Eigen::MatrixXd& patches : pseq.frames) {
    if (patches.rows() != pseq.patches()) {
      throw Error("layout mismatch: " + std::to_string(patches.rows()) + " patches for a " +
                  std::to_string(pseq.rows) + "x" + std::to_string(pseq.cols) + " grid");
    }
    if (patches.cols() != probe.dim()) {
      throw Error("dimension mismatch: probe expects D=" + std::to_string(probe.dim()) +
                  ", patches have D=" + std::to_string(patches.cols()));
    }
    const Eigen::VectorXd contrib = patches * w;
    Eigen::MatrixXd map(pseq.rows, pseq.cols);
    for (Eigen::Index p = 0; p < contrib.size(); ++p) map(p / pseq.cols, p % pseq.cols) = contrib(p);
    maps.push_back(std::move(map));
  }
  return maps;
}

RelativePoint saliency_peak(const SaliencyMap& map) {
  const Eigen::Index h = map.grid.rows();
  const Eigen::Index w = map.grid.cols();
  if (h < 1 || w < 1) throw Error("saliency map is empty");
  Eigen::Index best_i = 0;
  Eigen::Index best_j = 0;
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < w; ++j) {
      if (map.grid(i, j) > map.grid(best_i, best_j)) {
        best_i = i;
        best_j = j;
      }
    }
  }
  return {(static_cast<double>(best_j) + 0.5) / static_cast<double>(w),
          (static_cast<double>(best_i) + 0.5) / static_cast<double>(h)};
}

std::vector<SaliencyMap> read_saliency(const std::filesystem::path& path) {
  const FeatureSequence seq = read_fseq(path);
  const auto [h, w] = read_grid(path);
  if (seq.dim() != h * w) {
    throw Error("layout mismatch: " + path.string() + " has " + std::to_string(seq.dim()) +
                " cells per frame, sidecar declares " + std::to_string(h) + "x" +
                std::to_string(w));
  }
  std::vector<SaliencyMap> maps;
  for (Eigen::Index t = 0; t < seq.frames(); ++t) {
    SaliencyMap m;
    m.frame_index = t;
    m.grid.resize(h, w);
    for (Eigen::Index c = 0; c < h * w; ++c) m.grid(c / w, c % w) = seq.data(t, c);
    maps.push_back(std::move(m));
  }
  return maps;
}

void write_saliency(const std::vector<SaliencyMap>& maps, const std::filesystem::path& path,
                    float fps) {
  if (maps.empty()) throw Error("no saliency maps to write");
  const Eigen::Index h = maps.front().grid.rows();
  const Eigen::Index w = maps.front().grid.cols();
  FeatureSequence seq;
  seq.modality = Modality::kVisual;
  seq.fps = fps;
  seq.data.resize(static_cast<Eigen::Index>(maps.size()), h * w);
  for (std::size_t t = 0; t < maps.size(); ++t) {
    if (maps[t].grid.rows() != h || maps[t].grid.cols() != w) {
      throw Error("saliency maps must share one grid size");
    }
    for (Eigen::Index c = 0; c < h * w; ++c) {
      seq.data(static_cast<Eigen::Index>(t), c) = static_cast<float>(maps[t].grid(c / w, c % w));
    }
  }
  write_fseq(seq, path);
  write_grid(path, h, w);
}

PatchFeatureSequence read_patch_features(const std::filesystem::path& path) {
  const FeatureSequence seq = read_fseq(path);
  const auto [h, w] = read_grid(path);
  const Eigen::Index patches = h * w;
  if (seq.dim() % patches != 0) {
    throw Error("layout mismatch: row width " + std::to_string(seq.dim()) +
                " is not a multiple of " + std::to_string(patches) + " patches");
  }
  const Eigen::Index dim = seq.dim() / patches;
  PatchFeatureSequence pseq;
  pseq.rows = h;
  pseq.cols = w;
  for (Eigen::Index t = 0; t < seq.frames(); ++t) {
    Eigen::MatrixXd frame(patches, dim);
    for (Eigen::Index p = 0; p < patches; ++p) {
      for (Eigen::Index d = 0; d < dim; ++d) frame(p, d) = seq.data(t, p * dim + d);
    }
    pseq.frames.push_back(std::move(frame));
  }
  return pseq;
}

void write_patch_features(const PatchFeatureSequence& pseq, const std::filesystem::path& path,
                          float fps) {
  if (pseq.frames.empty()) throw Error("patch sequence has no frames");
  const Eigen::Index patches = pseq.patches();
  const Eigen::Index dim = pseq.frames.front().cols();
  FeatureSequence seq;
  seq.modality = Modality::kVisual;
  seq.fps = fps;
  seq.data.resize(static_cast<Eigen::Index>(pseq.frames.size()), patches * dim);
  for (std::size_t t = 0; t < pseq.frames.size(); ++t) {
    const Eigen::MatrixXd& frame = pseq.frames[t];
    if (frame.rows() != patches || frame.cols() != dim) {
      throw Error("layout mismatch in patch frame " + std::to_string(t));
    }
    for (Eigen::Index p = 0; p < patches; ++p) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        seq.data(static_cast<Eigen::Index>(t), p * dim + d) = static_cast<float>(frame(p, d));
      }
    }
  }
  write_fseq(seq, path);
  write_grid(path, pseq.rows, pseq.cols);
}

}  // namespace probekit
