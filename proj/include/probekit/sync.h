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

// Audio-visual synchronization detector. An MLP Phi scores how well an audio
// frame matches a visual frame. Training is contrastive within each video:
// audio frame i should prefer visual frame i over the visual frames in its
// temporal neighborhood N(i) = [i - r, i + r] clamped to the video, self
// included. At test time the per-frame logits are inverted and pooled with
// log-sum-exp, so one badly synchronized stretch raises the video score.

#ifndef PROBEKIT_SYNC_H_
#define PROBEKIT_SYNC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "probekit/checkpoint.h"
#include "probekit/manifest.h"
#include "probekit/params.h"
#include "probekit/schedule.h"

namespace probekit {

// Four dense layers (Da+Dv) -> h -> h -> h -> 1; each hidden pre-activation
// is layer-normalized and then passed through ReLU.
class AlignmentNet {
 public:
  AlignmentNet(Eigen::Index audio_dim, Eigen::Index visual_dim, Eigen::Index hidden, Rng& rng);

  Eigen::Index audio_dim() const { return audio_dim_; }
  Eigen::Index visual_dim() const { return visual_dim_; }
  Eigen::Index hidden() const { return hidden_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  double phi(const Eigen::VectorXd& a, const Eigen::VectorXd& v) const;

  // Logit of every pair (a.row(ii[m]), v.row(kk[m])).
  Eigen::VectorXd pair_logits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                              const std::vector<Eigen::Index>& ii,
                              const std::vector<Eigen::Index>& kk) const;

  // Same, then adds sum_m d_logits[m] * d(logit_m)/d(theta) to the gradients.
  void pair_backward(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                     const std::vector<Eigen::Index>& ii, const std::vector<Eigen::Index>& kk,
                     const Eigen::VectorXd& d_logits);

  Checkpoint to_checkpoint() const;
  static AlignmentNet from_checkpoint(const Checkpoint& ckpt);

 private:
  struct Cache;
  Eigen::VectorXd run(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                      const std::vector<Eigen::Index>& ii, const std::vector<Eigen::Index>& kk,
                      Cache* cache) const;
  void check_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v) const;

  Eigen::Index audio_dim_;
  Eigen::Index visual_dim_;
  Eigen::Index hidden_;
  ParamSet params_;
  std::size_t w1_ = 0, b1_ = 0, g1_ = 0, be1_ = 0;
  std::size_t w2_ = 0, b2_ = 0, g2_ = 0, be2_ = 0;
  std::size_t w3_ = 0, b3_ = 0, g3_ = 0, be3_ = 0;
  std::size_t w4_ = 0, b4_ = 0;
};

struct SyncConfig {
  int neighborhood_radius = 15;
  double lr0 = 1e-5;
  double plateau_factor = 0.1;
  int plateau_patience = 5;
  int max_epochs = 100;
  int early_stop_patience = 10;
  Eigen::Index hidden = 512;
  int batch_videos = 8;
  std::uint64_t seed = 0;
};

// Divides each row by its Euclidean norm. Zero rows stay zero and are
// reported with a warning; their count goes to *zero_rows when given.
Eigen::MatrixXd normalize_frames(const Eigen::MatrixXd& seq, std::size_t* zero_rows = nullptr);

// Half-open frame range of N(i).
std::pair<Eigen::Index, Eigen::Index> neighborhood(Eigen::Index i, Eigen::Index frames,
                                                   int radius);

// Softmax of Phi(a_i, v_k) over k in N(i), one vector per audio frame i.
std::vector<Eigen::VectorXd> sync_softmax(const AlignmentNet& net, const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& v, int radius);

// -(1/T) sum_i log p(v_i | a_i). Requires equal lengths with T >= 2. With
// accumulate_grad, adds grad_scale * d(loss)/d(theta) to the tensors.
double sync_loss(AlignmentNet& net, const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                 int radius, bool accumulate_grad, double grad_scale = 1.0);

// log-sum-exp over t of -Phi(a_t, v_t).
double sync_score(const AlignmentNet& net, const Eigen::MatrixXd& a, const Eigen::MatrixXd& v);

struct SyncPair {
  Eigen::MatrixXd audio;
  Eigen::MatrixXd visual;
};

// Loads the "audio" and "visual" streams, trims them to a common length, and
// L2-normalizes every frame.
SyncPair load_sync_pair(const VideoRecord& record);

// Adam with reduce-on-plateau and early stopping on validation loss; returns
// the best-validation weights. Deterministic for a given seed.
AlignmentNet sync_train(std::span<const SyncPair> train, std::span<const SyncPair> val,
                        const SyncConfig& cfg, TrainHistory* history = nullptr);
// Manifests must hold real videos only, each with both streams.
AlignmentNet sync_train(const DatasetManifest& train, const DatasetManifest& val,
                        const SyncConfig& cfg, TrainHistory* history = nullptr);

}  // namespace probekit

#endif  // PROBEKIT_SYNC_H_
