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

#include "probekit/sync.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "probekit/error.h"
#include "probekit/geometry.h"
#include "probekit/nn.h"

namespace probekit {

struct AlignmentNet::Cache {
  Eigen::MatrixXd z1, z2, z3;  // pre-activations
  LayerNormCache ln1, ln2, ln3;
  Eigen::MatrixXd n1, n2, n3;  // layer norm outputs
  Eigen::MatrixXd r1, r2, r3;  // ReLU outputs
};

AlignmentNet::AlignmentNet(Eigen::Index audio_dim, Eigen::Index visual_dim, Eigen::Index hidden,
                           Rng& rng)
    : audio_dim_(audio_dim), visual_dim_(visual_dim), hidden_(hidden) {
  if (audio_dim < 1 || visual_dim < 1 || hidden < 1) throw Error("invalid alignment net shape");
  const Eigen::Index h = hidden;
  w1_ = params_.add("l1.w", h, audio_dim + visual_dim, InitScheme::kNormal002, rng);
  b1_ = params_.add("l1.b", 1, h, InitScheme::kZeros, rng);
  g1_ = params_.add("ln1.g", 1, h, InitScheme::kOnes, rng);
  be1_ = params_.add("ln1.b", 1, h, InitScheme::kZeros, rng);
  w2_ = params_.add("l2.w", h, h, InitScheme::kNormal002, rng);
  b2_ = params_.add("l2.b", 1, h, InitScheme::kZeros, rng);
  g2_ = params_.add("ln2.g", 1, h, InitScheme::kOnes, rng);
  be2_ = params_.add("ln2.b", 1, h, InitScheme::kZeros, rng);
  w3_ = params_.add("l3.w", h, h, InitScheme::kNormal002, rng);
  b3_ = params_.add("l3.b", 1, h, InitScheme::kZeros, rng);
  g3_ = params_.add("ln3.g", 1, h, InitScheme::kOnes, rng);
  be3_ = params_.add("ln3.b", 1, h, InitScheme::kZeros, rng);
  w4_ = params_.add("l4.w", 1, h, InitScheme::kNormal002, rng);
  b4_ = params_.add("l4.b", 1, 1, InitScheme::kZeros, rng);
}

void AlignmentNet::check_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v) const {
  if (a.cols() != audio_dim_ || v.cols() != visual_dim_) {
    throw Error("dimension mismatch: alignment net expects audio D=" + std::to_string(audio_dim_) +
                " and visual D=" + std::to_string(visual_dim_) + ", got " +
                std::to_string(a.cols()) + " and " + std::to_string(v.cols()));
  }
}

// The first layer is split into its audio and visual column blocks so each
// frame is projected once, however many pairs it appears in.
Eigen::VectorXd AlignmentNet::run(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                                  const std::vector<Eigen::Index>& ii,
                                  const std::vector<Eigen::Index>& kk, Cache* cache) const {
  check_dims(a, v);
  if (ii.size() != kk.size()) throw Error("pair index lists differ in length");
  const Eigen::MatrixXd& w1 = params_[w1_].value;
  const Eigen::MatrixXd a1 = a * w1.leftCols(audio_dim_).transpose();
  const Eigen::MatrixXd v1 = v * w1.rightCols(visual_dim_).transpose();
  const auto m = static_cast<Eigen::Index>(ii.size());

  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.z1.resize(m, hidden_);
  for (Eigen::Index r = 0; r < m; ++r) {
    c.z1.row(r) = a1.row(ii[r]) + v1.row(kk[r]) + params_[b1_].value;
  }
  c.n1 = layer_norm_forward(c.z1, params_[g1_], params_[be1_], &c.ln1);
  c.r1 = relu_forward(c.n1);
  c.z2 = dense_forward(c.r1, params_[w2_], params_[b2_]);
  c.n2 = layer_norm_forward(c.z2, params_[g2_], params_[be2_], &c.ln2);
  c.r2 = relu_forward(c.n2);
  c.z3 = dense_forward(c.r2, params_[w3_], params_[b3_]);
  c.n3 = layer_norm_forward(c.z3, params_[g3_], params_[be3_], &c.ln3);
  c.r3 = relu_forward(c.n3);
  return dense_forward(c.r3, params_[w4_], params_[b4_]).col(0);
}

Eigen::VectorXd AlignmentNet::pair_logits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                                          const std::vector<Eigen::Index>& ii,
                                          const std::vector<Eigen::Index>& kk) const {
  return run(a, v, ii, kk, nullptr);
}

double AlignmentNet::phi(const Eigen::VectorXd& a, const Eigen::VectorXd& v) const {
  return run(a.transpose(), v.transpose(), {0}, {0}, nullptr)(0);
}

void AlignmentNet::pair_backward(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                                 const std::vector<Eigen::Index>& ii,
                                 const std::vector<Eigen::Index>& kk,
                                 const Eigen::VectorXd& d_logits) {
  Cache c;
  run(a, v, ii, kk, &c);
  Eigen::MatrixXd d = dense_backward(c.r3, d_logits, params_[w4_], params_[b4_]);
  d = layer_norm_backward(relu_backward(c.n3, d), c.ln3, params_[g3_], params_[be3_]);
  d = dense_backward(c.r2, d, params_[w3_], params_[b3_]);
  d = layer_norm_backward(relu_backward(c.n2, d), c.ln2, params_[g2_], params_[be2_]);
  d = dense_backward(c.r1, d, params_[w2_], params_[b2_]);
  d = layer_norm_backward(relu_backward(c.n1, d), c.ln1, params_[g1_], params_[be1_]);

  params_[b1_].grad += d.colwise().sum();
  Eigen::MatrixXd da = Eigen::MatrixXd::Zero(a.rows(), hidden_);
  Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(v.rows(), hidden_);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    da.row(ii[r]) += d.row(r);
    dv.row(kk[r]) += d.row(r);
  }
  params_[w1_].grad.leftCols(audio_dim_) += da.transpose() * a;
  params_[w1_].grad.rightCols(visual_dim_) += dv.transpose() * v;
}

Checkpoint AlignmentNet::to_checkpoint() const {
  return probekit::to_checkpoint(params_, {{"kind", "sync_alignment"},
                                           {"audio_dim", audio_dim_},
                                           {"visual_dim", visual_dim_},
                                           {"hidden", hidden_}});
}

AlignmentNet AlignmentNet::from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "sync_alignment");
  Rng unused(0);
  AlignmentNet net(ckpt.meta.at("audio_dim").get<Eigen::Index>(),
                   ckpt.meta.at("visual_dim").get<Eigen::Index>(),
                   ckpt.meta.at("hidden").get<Eigen::Index>(), unused);
  load_params(net.params_, ckpt);
  return net;
}

Eigen::MatrixXd normalize_frames(const Eigen::MatrixXd& seq, std::size_t* zero_rows) {
  Eigen::MatrixXd out = seq;
  std::size_t zeros = 0;
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    const double norm = out.row(t).norm();
    if (norm == 0.0) {
      ++zeros;
    } else {
      out.row(t) /= norm;
    }
  }
  if (zeros > 0) spdlog::warn("normalize_frames: {} zero frame(s) left unnormalized", zeros);
  if (zero_rows != nullptr) *zero_rows = zeros;
  return out;
}

std::pair<Eigen::Index, Eigen::Index> neighborhood(Eigen::Index i, Eigen::Index frames,
                                                   int radius) {
  return {std::max<Eigen::Index>(0, i - radius), std::min<Eigen::Index>(frames, i + radius + 1)};
}

namespace {

struct PairLayout {
  std::vector<Eigen::Index> ii, kk;
  std::vector<Eigen::Index> offset;  // start of frame i's pairs; size T + 1
};

PairLayout layout_pairs(Eigen::Index frames, int radius) {
  PairLayout p;
  p.offset.push_back(0);
  for (Eigen::Index i = 0; i < frames; ++i) {
    const auto [lo, hi] = neighborhood(i, frames, radius);
    for (Eigen::Index k = lo; k < hi; ++k) {
      p.ii.push_back(i);
      p.kk.push_back(k);
    }
    p.offset.push_back(static_cast<Eigen::Index>(p.ii.size()));
  }
  return p;
}

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v, int radius) {
  if (radius < 1) throw Error("neighborhood radius must be >= 1");
  if (a.rows() != v.rows()) {
    throw Error("audio and visual streams differ in length (" + std::to_string(a.rows()) +
                " vs " + std::to_string(v.rows()) + "); trim-align them first");
  }
  if (a.rows() < 2) throw Error("sync loss needs T >= 2");
}

}  // namespace

std::vector<Eigen::VectorXd> sync_softmax(const AlignmentNet& net, const Eigen::MatrixXd& a,
                                          const Eigen::MatrixXd& v, int radius) {
  check_pair(a, v, radius);
  const PairLayout p = layout_pairs(a.rows(), radius);
  const Eigen::VectorXd logits = net.pair_logits(a, v, p.ii, p.kk);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out.push_back(softmax(logits.segment(p.offset[i], p.offset[i + 1] - p.offset[i])));
  }
  return out;
}

double sync_loss(AlignmentNet& net, const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                 int radius, bool accumulate_grad, double grad_scale) {
  check_pair(a, v, radius);
  const Eigen::Index frames = a.rows();
  const PairLayout p = layout_pairs(frames, radius);
  const Eigen::VectorXd logits = net.pair_logits(a, v, p.ii, p.kk);
  Eigen::VectorXd d_logits(logits.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < frames; ++i) {
    const Eigen::Index lo = p.offset[i];
    const Eigen::Index n = p.offset[i + 1] - lo;
    const auto seg = logits.segment(lo, n);
    const Eigen::Index self = i - p.kk[lo];
    total += logsumexp(seg) - seg(self);
    if (accumulate_grad) {
      d_logits.segment(lo, n) = softmax(seg);
      d_logits(lo + self) -= 1.0;
    }
  }
  const double inv_t = 1.0 / static_cast<double>(frames);
  if (accumulate_grad) net.pair_backward(a, v, p.ii, p.kk, (grad_scale * inv_t) * d_logits);
  return total * inv_t;
}

double sync_score(const AlignmentNet& net, const Eigen::MatrixXd& a, const Eigen::MatrixXd& v) {
  if (a.rows() != v.rows()) throw Error("audio and visual streams differ in length");
  if (a.rows() < 1) throw Error("sync score needs at least one frame");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(a.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return logsumexp(-net.pair_logits(a, v, idx, idx));
}

SyncPair load_sync_pair(const VideoRecord& record) {
  for (const char* key : {"audio", "visual"}) {
    if (record.features.count(key) == 0) {
      throw Error("record '" + record.id + "' has no " + key + " stream");
    }
  }
  const auto [a, v] = trim_align(load_stream(record, "audio"), load_stream(record, "visual"));
  return {normalize_frames(a.as_double()), normalize_frames(v.as_double())};
}

namespace {

double mean_loss(AlignmentNet& net, std::span<const SyncPair> set, int radius) {
  double total = 0.0;
  for (const SyncPair& p : set) total += sync_loss(net, p.audio, p.visual, radius, false);
  return total / static_cast<double>(set.size());
}

}  // namespace

AlignmentNet sync_train(std::span<const SyncPair> train, std::span<const SyncPair> val,
                        const SyncConfig& cfg, TrainHistory* history) {
  if (train.empty() || val.empty()) throw Error("sync_train needs non-empty train and val sets");
  if (cfg.neighborhood_radius < 1) throw Error("neighborhood radius must be >= 1");
  if (cfg.batch_videos < 1 || cfg.max_epochs < 1) throw Error("invalid sync training config");
  const Eigen::Index da = train.front().audio.cols();
  const Eigen::Index dv = train.front().visual.cols();

  const Rng base(cfg.seed);
  Rng init_rng = base.split("sync.init");
  Rng shuffle_rng = base.split("sync.shuffle");
  AlignmentNet net(da, dv, cfg.hidden, init_rng);

  PlateauScheduler sched(cfg.lr0, cfg.plateau_factor, cfg.plateau_patience);
  EarlyStopping stopper(cfg.early_stop_patience);
  std::vector<Eigen::MatrixXd> best = net.params().snapshot();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_videos);
  std::int64_t step = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const AdamConfig adam{.lr = sched.lr()};
    shuffle_rng.shuffle(std::span(order));
    double train_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      const double w = 1.0 / static_cast<double>(hi - lo);
      net.params().zero_grad();
      for (std::size_t k = lo; k < hi; ++k) {
        const SyncPair& p = train[order[k]];
        train_loss += sync_loss(net, p.audio, p.visual, cfg.neighborhood_radius, true, w);
      }
      adam_step(net.params(), adam, ++step);
    }
    train_loss /= static_cast<double>(order.size());
    const double val_loss = mean_loss(net, val, cfg.neighborhood_radius);
    if (history != nullptr) {
      history->train_loss.push_back(train_loss);
      history->val_loss.push_back(val_loss);
      history->lr.push_back(adam.lr);
    }
    spdlog::info("sync epoch {}: lr {:.3g} train {:.6f} val {:.6f}", epoch, adam.lr, train_loss,
                 val_loss);
    sched.step(val_loss);
    if (stopper.update(val_loss)) best = net.params().snapshot();
    if (stopper.should_stop()) break;
  }
  net.params().restore(best);
  net.params().zero_grad();
  if (history != nullptr) history->best_epoch = stopper.best_epoch();
  return net;
}

AlignmentNet sync_train(const DatasetManifest& train, const DatasetManifest& val,
                        const SyncConfig& cfg, TrainHistory* history) {
  std::vector<SyncPair> train_pairs;
  std::vector<SyncPair> val_pairs;
  for (const auto* m : {&train, &val}) {
    for (const VideoRecord& r : m->records) {
      if (r.label != 0) {
        throw Error("synchronization training uses real videos only; '" + r.id + "' is fake");
      }
    }
  }
  for (const VideoRecord& r : train.records) train_pairs.push_back(load_sync_pair(r));
  for (const VideoRecord& r : val.records) val_pairs.push_back(load_sync_pair(r));
  return sync_train(train_pairs, val_pairs, cfg, history);
}

}  // namespace probekit
