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

// Linear probe over frozen frame embeddings. Each frame gets a logit
// s_t = w . phi_t + b and the video logit is the log-sum-exp of the frame
// logits, a smooth maximum: one strongly fake region is enough to flag the
// whole video. Training minimizes binary cross-entropy of sigmoid(s) against
// video-level labels.

#ifndef PROBEKIT_PROBE_H_
#define PROBEKIT_PROBE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "probekit/checkpoint.h"
#include "probekit/fseq.h"
#include "probekit/manifest.h"
#include "probekit/params.h"
#include "probekit/schedule.h"

namespace probekit {

class LinearProbe {
 public:
  // All-zero weights and bias.
  explicit LinearProbe(Eigen::Index dim);
  // Weights ~ N(0, 0.02^2), zero bias.
  static LinearProbe initialized(Eigen::Index dim, Rng& rng);

  Eigen::Index dim() const { return dim_; }
  Eigen::VectorXd weights() const { return params_[w_].value.row(0).transpose(); }
  double bias() const { return params_[b_].value(0, 0); }
  void set_weights(const Eigen::VectorXd& w);
  void set_bias(double b) { params_[b_].value(0, 0) = b; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  Tensor& weight_tensor() { return params_[w_]; }
  Tensor& bias_tensor() { return params_[b_]; }

  Checkpoint to_checkpoint() const;
  static LinearProbe from_checkpoint(const Checkpoint& ckpt);

 private:
  Eigen::Index dim_;
  ParamSet params_;
  std::size_t w_ = 0;
  std::size_t b_ = 0;
};

Eigen::VectorXd frame_scores(const LinearProbe& probe, const Eigen::MatrixXd& frames);
Eigen::VectorXd frame_scores(const LinearProbe& probe, const FeatureSequence& seq);
double video_score(const LinearProbe& probe, const Eigen::MatrixXd& frames);
double video_score(const LinearProbe& probe, const FeatureSequence& seq);

struct LabeledSequence {
  std::string id;
  int label = 0;
  Eigen::MatrixXd frames;
};

// Loads one stream per record (see load_stream) at 64-bit precision.
std::vector<LabeledSequence> load_labeled(const DatasetManifest& manifest, const std::string& key);

struct ProbeTrainConfig {
  double lr = 1e-3;
  int max_epochs = 100;
  int early_stop_patience = 10;
  int batch_videos = 32;
  std::uint64_t seed = 0;
};

// Mean binary cross-entropy of sigmoid(video_score) over `videos`; adds the
// gradient of that mean to the probe's tensors when accumulate_grad is set.
double probe_loss(LinearProbe& probe, std::span<const LabeledSequence> videos,
                  bool accumulate_grad);

// Adam on mini-batches of videos; stops after `early_stop_patience` epochs
// without a strict validation improvement and returns the best-validation
// parameters. Deterministic for a given seed.
LinearProbe train_probe(std::span<const LabeledSequence> train,
                        std::span<const LabeledSequence> val, const ProbeTrainConfig& cfg,
                        TrainHistory* history = nullptr);
LinearProbe train_probe(const DatasetManifest& train, const DatasetManifest& val,
                        const std::string& key, const ProbeTrainConfig& cfg,
                        TrainHistory* history = nullptr);

struct ScoreReport {
  std::string video_id;
  double video_score = 0.0;
  double video_prob = 0.5;
  Eigen::VectorXd frame_scores;
};

ScoreReport score_video(const LinearProbe& probe, const std::string& id,
                        const Eigen::MatrixXd& frames);

struct RecordFailure {
  std::string id;
  std::string message;
};

struct PredictResult {
  std::vector<ScoreReport> reports;
  std::vector<RecordFailure> failures;
};

// Scores every record in manifest order. Unreadable or mismatched records are
// collected as failures instead of aborting the run.
PredictResult predict(const LinearProbe& probe, const DatasetManifest& manifest,
                      const std::string& key, int jobs = 1);

}  // namespace probekit

#endif  // PROBEKIT_PROBE_H_
