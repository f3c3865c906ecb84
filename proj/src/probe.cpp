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

#include "probekit/probe.h"

#include <algorithm>
#include <numeric>
#include <optional>

#include <spdlog/spdlog.h>

#include "probekit/error.h"
#include "probekit/nn.h"
#include "probekit/parallel.h"
#include "probekit/schedule.h"

namespace probekit {
namespace {

void check_dim(const LinearProbe& probe, Eigen::Index dim) {
  if (dim != probe.dim()) {
    throw Error("dimension mismatch: probe expects D=" + std::to_string(probe.dim()) +
                ", features have D=" + std::to_string(dim));
  }
}

void check_training_split(std::span<const LabeledSequence> videos, const char* split) {
  if (videos.empty()) throw Error(std::string(split) + " split is empty");
  bool has_real = false;
  bool has_fake = false;
  const Eigen::Index dim = videos.front().frames.cols();
  for (const LabeledSequence& v : videos) {
    has_real |= v.label == 0;
    has_fake |= v.label == 1;
    if (v.frames.rows() < 1) throw Error("video '" + v.id + "' has no frames");
    if (v.frames.cols() != dim) {
      throw Error("dimension mismatch across records: '" + v.id + "' has D=" +
                  std::to_string(v.frames.cols()) + ", expected " + std::to_string(dim));
    }
  }
  if (!has_real || !has_fake) {
    throw Error(std::string("degenerate labels: ") + split + " split needs both classes");
  }
}

// Mean BCE over videos[indices]; gradients of the mean go into the probe.
double batch_loss(LinearProbe& probe, std::span<const LabeledSequence> videos,
                  std::span<const std::size_t> indices, bool accumulate_grad) {
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  double total = 0.0;
  for (const std::size_t i : indices) {
    const LabeledSequence& v = videos[i];
    const Eigen::VectorXd z = frame_scores(probe, v.frames);
    const double s = logsumexp(z);
    const double y = static_cast<double>(v.label);
    // -[y log sigmoid(s) + (1 - y) log(1 - sigmoid(s))]
    total += softplus(s) - y * s;
    if (accumulate_grad) {
      const double ds = (sigmoid(s) - y) * inv_n;
      const Eigen::VectorXd alpha = softmax(z);
      probe.weight_tensor().grad.row(0) += ds * (v.frames.transpose() * alpha).transpose();
      probe.bias_tensor().grad(0, 0) += ds;
    }
  }
  return total * inv_n;
}

}  // namespace

LinearProbe::LinearProbe(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) throw Error("probe dimension must be >= 1");
  Rng unused(0);
  w_ = params_.add("w", 1, dim, InitScheme::kZeros, unused);
  b_ = params_.add("b", 1, 1, InitScheme::kZeros, unused);
}

LinearProbe LinearProbe::initialized(Eigen::Index dim, Rng& rng) {
  LinearProbe probe(dim);
  for (Eigen::Index j = 0; j < dim; ++j) probe.params_[probe.w_].value(0, j) = 0.02 * rng.normal();
  return probe;
}

void LinearProbe::set_weights(const Eigen::VectorXd& w) {
  check_dim(*this, w.size());
  params_[w_].value.row(0) = w.transpose();
}

Checkpoint LinearProbe::to_checkpoint() const {
  return probekit::to_checkpoint(params_, {{"kind", "linear_probe"}, {"dim", dim_}});
}

LinearProbe LinearProbe::from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "linear_probe");
  LinearProbe probe(ckpt.meta.at("dim").get<Eigen::Index>());
  load_params(probe.params_, ckpt);
  return probe;
}

Eigen::VectorXd frame_scores(const LinearProbe& probe, const Eigen::MatrixXd& frames) {
  check_dim(probe, frames.cols());
  Eigen::VectorXd scores = frames * probe.weights();
  scores.array() += probe.bias();
  return scores;
}

Eigen::VectorXd frame_scores(const LinearProbe& probe, const FeatureSequence& seq) {
  return frame_scores(probe, seq.as_double());
}

double video_score(const LinearProbe& probe, const Eigen::MatrixXd& frames) {
  return logsumexp(frame_scores(probe, frames));
}

double video_score(const LinearProbe& probe, const FeatureSequence& seq) {
  return video_score(probe, seq.as_double());
}

std::vector<LabeledSequence> load_labeled(const DatasetManifest& manifest, const std::string& key) {
  std::vector<LabeledSequence> out;
  out.reserve(manifest.records.size());
  for (const VideoRecord& r : manifest.records) {
    out.push_back({r.id, r.label, load_stream(r, key).as_double()});
  }
  return out;
}

double probe_loss(LinearProbe& probe, std::span<const LabeledSequence> videos,
                  bool accumulate_grad) {
  if (videos.empty()) throw Error("probe_loss over an empty set");
  std::vector<std::size_t> all(videos.size());
  std::iota(all.begin(), all.end(), 0);
  return batch_loss(probe, videos, all, accumulate_grad);
}

LinearProbe train_probe(std::span<const LabeledSequence> train,
                        std::span<const LabeledSequence> val, const ProbeTrainConfig& cfg,
                        TrainHistory* history) {
  check_training_split(train, "train");
  check_training_split(val, "val");
  const Eigen::Index dim = train.front().frames.cols();
  if (val.front().frames.cols() != dim) throw Error("dimension mismatch between train and val");
  if (cfg.batch_videos < 1 || cfg.max_epochs < 1) throw Error("invalid probe training config");

  const Rng base(cfg.seed);
  Rng init_rng = base.split("probe.init");
  Rng shuffle_rng = base.split("probe.shuffle");
  LinearProbe probe = LinearProbe::initialized(dim, init_rng);

  const AdamConfig adam{.lr = cfg.lr};
  EarlyStopping stopper(cfg.early_stop_patience);
  std::vector<Eigen::MatrixXd> best = probe.params().snapshot();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_videos);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double train_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      probe.params().zero_grad();
      const std::span<const std::size_t> idx(order.data() + lo, hi - lo);
      train_loss += batch_loss(probe, train, idx, true) * static_cast<double>(hi - lo);
      adam_step(probe.params(), adam, ++step);
    }
    train_loss /= static_cast<double>(order.size());
    const double val_loss = probe_loss(probe, val, false);
    if (history != nullptr) {
      history->train_loss.push_back(train_loss);
      history->val_loss.push_back(val_loss);
      history->lr.push_back(cfg.lr);
    }
    spdlog::debug("probe epoch {}: train {:.6f} val {:.6f}", epoch, train_loss, val_loss);
    if (stopper.update(val_loss)) best = probe.params().snapshot();
    if (stopper.should_stop()) break;
  }
  probe.params().restore(best);
  probe.params().zero_grad();
  if (history != nullptr) history->best_epoch = stopper.best_epoch();
  return probe;
}

LinearProbe train_probe(const DatasetManifest& train, const DatasetManifest& val,
                        const std::string& key, const ProbeTrainConfig& cfg,
                        TrainHistory* history) {
  const std::vector<LabeledSequence> train_data = load_labeled(train, key);
  const std::vector<LabeledSequence> val_data = load_labeled(val, key);
  return train_probe(train_data, val_data, cfg, history);
}

ScoreReport score_video(const LinearProbe& probe, const std::string& id,
                        const Eigen::MatrixXd& frames) {
  ScoreReport report;
  report.video_id = id;
  report.frame_scores = frame_scores(probe, frames);
  report.video_score = logsumexp(report.frame_scores);
  report.video_prob = sigmoid(report.video_score);
  return report;
}

PredictResult predict(const LinearProbe& probe, const DatasetManifest& manifest,
                      const std::string& key, int jobs) {
  const std::size_t n = manifest.records.size();
  std::vector<std::optional<ScoreReport>> reports(n);
  std::vector<std::string> errors(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const VideoRecord& r = manifest.records[i];
    try {
      reports[i] = score_video(probe, r.id, load_stream(r, key).as_double());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  PredictResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i]) {
      result.reports.push_back(std::move(*reports[i]));
    } else {
      result.failures.push_back({manifest.records[i].id, errors[i]});
      spdlog::warn("predict: skipping '{}': {}", manifest.records[i].id, errors[i]);
    }
  }
  return result;
}

}  // namespace probekit
