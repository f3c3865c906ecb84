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

// Next-token prediction over feature streams. A small decoder-only
// transformer predicts frame t from frames 0..t-1; trained with mean squared
// error on real videos only, it flags a video by its worst-predicted frame.
//
// Architecture: in_proj (D -> d_model) plus learned absolute positions, then
// `layers` pre-norm blocks
//   h = h + Attn(LN1(h))   causal multi-head self-attention
//   h = h + FF(LN2(h))     d_model -> ff_dim -> d_model, GELU
// and out_proj (d_model -> D).

#ifndef PROBEKIT_NTP_H_
#define PROBEKIT_NTP_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "probekit/checkpoint.h"
#include "probekit/manifest.h"
#include "probekit/params.h"
#include "probekit/schedule.h"

namespace probekit {

struct TransformerConfig {
  Eigen::Index input_dim = 0;
  Eigen::Index d_model = 512;
  int layers = 4;
  int heads = 4;
  Eigen::Index ff_dim = 1024;
  Eigen::Index max_len = 512;

  void validate() const;
};

class TransformerPredictor {
 public:
  TransformerPredictor(const TransformerConfig& cfg, Rng& rng);

  const TransformerConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // Input frames go through the optional per-dimension z-scoring first;
  // predictions and errors are then in the standardized space.
  void set_standardizer(const Eigen::VectorXd& mean, const Eigen::VectorXd& scale);
  bool standardizes() const { return mean_.has_value(); }
  Eigen::MatrixXd preprocess(const Eigen::MatrixXd& seq) const;

  // (T-1) x D; row t-1 is the prediction of frame t from frames 0..t-1.
  // Requires 2 <= T <= max_len. Operates on already preprocessed frames.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& seq) const;

  // Mean over predicted frames of the per-frame MSE (averaged over D).
  // With accumulate_grad, adds grad_scale * d(loss)/d(theta) to the tensors.
  double loss(const Eigen::MatrixXd& seq, bool accumulate_grad, double grad_scale = 1.0);

  Checkpoint to_checkpoint() const;
  static TransformerPredictor from_checkpoint(const Checkpoint& ckpt);

 private:
  struct Block {
    std::size_t ln1_g, ln1_b, qkv_w, qv_b, o_w, o_b;
    std::size_t ln2_g, ln2_b, ff1_w, ff1_b, ff2_w, ff2_b;
  };
  struct BlockCache;

  Eigen::MatrixXd run(const Eigen::MatrixXd& inputs, std::vector<BlockCache>* caches,
                      Eigen::MatrixXd* last_hidden) const;

  TransformerConfig cfg_;
  ParamSet params_;
  std::size_t in_w_ = 0, in_b_ = 0, pos_ = 0, out_w_ = 0, out_b_ = 0;
  std::vector<Block> blocks_;
  std::optional<Eigen::VectorXd> mean_;
  std::optional<Eigen::VectorXd> scale_;
};

struct NtpTrainConfig {
  double lr0 = 1e-3;
  int max_epochs = 100;
  int early_stop_patience = 10;
  int batch_videos = 8;
  std::uint64_t seed = 0;
  TransformerConfig arch;  // input_dim is taken from the data
  bool standardize = false;
};

// Cosine-annealed Adam with early stopping on validation loss; returns the
// best-validation weights. Sequences longer than max_len are truncated and
// sequences shorter than 2 frames are skipped with a warning.
TransformerPredictor ntp_train(std::span<const Eigen::MatrixXd> train,
                               std::span<const Eigen::MatrixXd> val, const NtpTrainConfig& cfg,
                               TrainHistory* history = nullptr);
// Manifests must hold real videos only.
TransformerPredictor ntp_train(const DatasetManifest& train, const DatasetManifest& val,
                               const std::string& key, const NtpTrainConfig& cfg,
                               TrainHistory* history = nullptr);

Eigen::MatrixXd ntp_forward(const TransformerPredictor& model, const Eigen::MatrixXd& seq);

// Per-frame errors (1/D) ||prediction_t - phi_t||^2 for t = 1..T-1, on the
// first max_len frames.
Eigen::VectorXd ntp_frame_errors(const TransformerPredictor& model, const Eigen::MatrixXd& seq);

// Maximum per-frame error; frame 0 has no history and is excluded.
double ntp_score(const TransformerPredictor& model, const Eigen::MatrixXd& seq);

}  // namespace probekit

#endif  // PROBEKIT_NTP_H_
