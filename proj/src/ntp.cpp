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

#include "probekit/ntp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "probekit/error.h"
#include "probekit/nn.h"

namespace probekit {

struct TransformerPredictor::BlockCache {
  Eigen::MatrixXd x_in;
  LayerNormCache ln1;
  Eigen::MatrixXd a;    // LN1 output
  Eigen::MatrixXd qkv;  // N x 3d
  std::vector<Eigen::MatrixXd> probs;
  Eigen::MatrixXd attn;  // concatenated head outputs, N x d
  Eigen::MatrixXd x_mid;
  LayerNormCache ln2;
  Eigen::MatrixXd b;   // LN2 output
  Eigen::MatrixXd f1;  // pre-activation, N x ff
  Eigen::MatrixXd g;   // GELU output
};

namespace {

// Row-wise softmax over the causal prefix j <= i; later entries are zero.
Eigen::MatrixXd causal_softmax(const Eigen::MatrixXd& scores) {
  const Eigen::Index n = scores.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = scores.row(i).head(i + 1).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      p(i, j) = std::exp(scores(i, j) - m);
      sum += p(i, j);
    }
    p.row(i).head(i + 1) /= sum;
  }
  return p;
}

void check_input(const TransformerConfig& cfg, const Eigen::MatrixXd& seq) {
  if (seq.rows() < 2) throw Error("next-token prediction needs T >= 2");
  if (seq.rows() > cfg.max_len) {
    throw Error("sequence of " + std::to_string(seq.rows()) + " frames exceeds max_len " +
                std::to_string(cfg.max_len));
  }
  if (seq.cols() != cfg.input_dim) {
    throw Error("dimension mismatch: model expects D=" + std::to_string(cfg.input_dim) +
                ", got " + std::to_string(seq.cols()));
  }
}

}  // namespace

void TransformerConfig::validate() const {
  if (input_dim < 1) throw Error("transformer input_dim must be >= 1");
  if (d_model < 1 || layers < 1 || heads < 1 || ff_dim < 1 || max_len < 2) {
    throw Error("invalid transformer shape");
  }
  if (d_model % heads != 0) throw Error("d_model must be divisible by the number of heads");
}

TransformerPredictor::TransformerPredictor(const TransformerConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const Eigen::Index d = cfg_.d_model;
  in_w_ = params_.add("in_proj.w", d, cfg_.input_dim, InitScheme::kNormal002, rng);
  in_b_ = params_.add("in_proj.b", 1, d, InitScheme::kZeros, rng);
  pos_ = params_.add("pos_embed", cfg_.max_len, d, InitScheme::kNormal002, rng);
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "block" + std::to_string(l) + ".";
    Block b{};
    b.ln1_g = params_.add(p + "ln1.g", 1, d, InitScheme::kOnes, rng);
    b.ln1_b = params_.add(p + "ln1.b", 1, d, InitScheme::kZeros, rng);
    b.qkv_w = params_.add(p + "attn.qkv.w", 3 * d, d, InitScheme::kNormal002, rng);
    // Query and value biases only: a key bias shifts every score in a row by
    // the same amount and cancels in the softmax.
    b.qv_b = params_.add(p + "attn.qv.b", 1, 2 * d, InitScheme::kZeros, rng);
    b.o_w = params_.add(p + "attn.out.w", d, d, InitScheme::kNormal002, rng);
    b.o_b = params_.add(p + "attn.out.b", 1, d, InitScheme::kZeros, rng);
    b.ln2_g = params_.add(p + "ln2.g", 1, d, InitScheme::kOnes, rng);
    b.ln2_b = params_.add(p + "ln2.b", 1, d, InitScheme::kZeros, rng);
    b.ff1_w = params_.add(p + "ff1.w", cfg_.ff_dim, d, InitScheme::kNormal002, rng);
    b.ff1_b = params_.add(p + "ff1.b", 1, cfg_.ff_dim, InitScheme::kZeros, rng);
    b.ff2_w = params_.add(p + "ff2.w", d, cfg_.ff_dim, InitScheme::kNormal002, rng);
    b.ff2_b = params_.add(p + "ff2.b", 1, d, InitScheme::kZeros, rng);
    blocks_.push_back(b);
  }
  out_w_ = params_.add("out_proj.w", cfg_.input_dim, d, InitScheme::kNormal002, rng);
  out_b_ = params_.add("out_proj.b", 1, cfg_.input_dim, InitScheme::kZeros, rng);
}

void TransformerPredictor::set_standardizer(const Eigen::VectorXd& mean,
                                            const Eigen::VectorXd& scale) {
  if (mean.size() != cfg_.input_dim || scale.size() != cfg_.input_dim) {
    throw Error("standardizer dimension mismatch");
  }
  if ((scale.array() <= 0.0).any()) throw Error("standardizer scale must be positive");
  mean_ = mean;
  scale_ = scale;
}

Eigen::MatrixXd TransformerPredictor::preprocess(const Eigen::MatrixXd& seq) const {
  if (!mean_) return seq;
  Eigen::MatrixXd out = seq.rowwise() - mean_->transpose();
  out.array().rowwise() /= scale_->transpose().array();
  return out;
}

Eigen::MatrixXd TransformerPredictor::run(const Eigen::MatrixXd& inputs,
                                          std::vector<BlockCache>* caches,
                                          Eigen::MatrixXd* last_hidden) const {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = cfg_.d_model;
  const Eigen::Index dh = d / cfg_.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Eigen::MatrixXd h = dense_forward(inputs, params_[in_w_], params_[in_b_]);
  h += params_[pos_].value.topRows(n);

  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& blk = blocks_[l];
    BlockCache local;
    BlockCache& c = caches != nullptr ? (*caches)[l] : local;
    c.x_in = h;
    c.a = layer_norm_forward(h, params_[blk.ln1_g], params_[blk.ln1_b], &c.ln1);
    c.qkv.noalias() = c.a * params_[blk.qkv_w].value.transpose();
    c.qkv.leftCols(d).rowwise() += params_[blk.qv_b].value.leftCols(d).row(0);
    c.qkv.rightCols(d).rowwise() += params_[blk.qv_b].value.rightCols(d).row(0);
    c.probs.resize(static_cast<std::size_t>(cfg_.heads));
    c.attn.resize(n, d);
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      const auto q = c.qkv.middleCols(hd * dh, dh);
      const auto k = c.qkv.middleCols(d + hd * dh, dh);
      const auto v = c.qkv.middleCols(2 * d + hd * dh, dh);
      c.probs[hd] = causal_softmax(scale * (q * k.transpose()));
      c.attn.middleCols(hd * dh, dh).noalias() = c.probs[hd] * v;
    }
    c.x_mid = h + dense_forward(c.attn, params_[blk.o_w], params_[blk.o_b]);
    c.b = layer_norm_forward(c.x_mid, params_[blk.ln2_g], params_[blk.ln2_b], &c.ln2);
    c.f1 = dense_forward(c.b, params_[blk.ff1_w], params_[blk.ff1_b]);
    c.g = gelu_forward(c.f1);
    h = c.x_mid + dense_forward(c.g, params_[blk.ff2_w], params_[blk.ff2_b]);
  }
  if (last_hidden != nullptr) *last_hidden = h;
  return dense_forward(h, params_[out_w_], params_[out_b_]);
}

Eigen::MatrixXd TransformerPredictor::forward(const Eigen::MatrixXd& seq) const {
  check_input(cfg_, seq);
  return run(seq.topRows(seq.rows() - 1), nullptr, nullptr);
}

double TransformerPredictor::loss(const Eigen::MatrixXd& seq, bool accumulate_grad,
                                  double grad_scale) {
  if (!accumulate_grad) {
    const Eigen::MatrixXd pred = forward(seq);
    const Eigen::MatrixXd diff = pred - seq.bottomRows(seq.rows() - 1);
    return diff.squaredNorm() / static_cast<double>(diff.size());
  }
  check_input(cfg_, seq);
  const Eigen::Index n = seq.rows() - 1;
  const Eigen::Index d = cfg_.d_model;
  const Eigen::Index dh = d / cfg_.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Eigen::MatrixXd inputs = seq.topRows(n);
  std::vector<BlockCache> caches(blocks_.size());
  Eigen::MatrixXd last_hidden;
  const Eigen::MatrixXd pred = run(inputs, &caches, &last_hidden);
  const Eigen::MatrixXd diff = pred - seq.bottomRows(n);
  const double loss_value = diff.squaredNorm() / static_cast<double>(diff.size());

  // Backward pass.
  const Eigen::MatrixXd d_pred = (2.0 * grad_scale / static_cast<double>(diff.size())) * diff;
  Eigen::MatrixXd dh_res = dense_backward(last_hidden, d_pred, params_[out_w_], params_[out_b_]);

  for (std::size_t li = blocks_.size(); li-- > 0;) {
    const Block& blk = blocks_[li];
    const BlockCache& c = caches[li];

    // Feed-forward branch.
    const Eigen::MatrixXd d_g = dense_backward(c.g, dh_res, params_[blk.ff2_w], params_[blk.ff2_b]);
    const Eigen::MatrixXd d_f1 = gelu_backward(c.f1, d_g);
    const Eigen::MatrixXd d_b = dense_backward(c.b, d_f1, params_[blk.ff1_w], params_[blk.ff1_b]);
    Eigen::MatrixXd d_mid =
        dh_res + layer_norm_backward(d_b, c.ln2, params_[blk.ln2_g], params_[blk.ln2_b]);

    // Attention branch.
    const Eigen::MatrixXd d_attn = dense_backward(c.attn, d_mid, params_[blk.o_w], params_[blk.o_b]);
    Eigen::MatrixXd d_qkv(n, 3 * d);
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      const auto q = c.qkv.middleCols(hd * dh, dh);
      const auto k = c.qkv.middleCols(d + hd * dh, dh);
      const auto v = c.qkv.middleCols(2 * d + hd * dh, dh);
      const Eigen::MatrixXd& p = c.probs[hd];
      const auto d_out = d_attn.middleCols(hd * dh, dh);
      const Eigen::MatrixXd d_p = d_out * v.transpose();
      d_qkv.middleCols(2 * d + hd * dh, dh).noalias() = p.transpose() * d_out;
      const Eigen::VectorXd row_dot = (d_p.array() * p.array()).rowwise().sum();
      const Eigen::MatrixXd d_s =
          scale * (p.array() * (d_p.array().colwise() - row_dot.array())).matrix();
      d_qkv.middleCols(hd * dh, dh).noalias() = d_s * k;
      d_qkv.middleCols(d + hd * dh, dh).noalias() = d_s.transpose() * q;
    }
    params_[blk.qkv_w].grad.noalias() += d_qkv.transpose() * c.a;
    params_[blk.qv_b].grad.leftCols(d) += d_qkv.leftCols(d).colwise().sum();
    params_[blk.qv_b].grad.rightCols(d) += d_qkv.rightCols(d).colwise().sum();
    const Eigen::MatrixXd d_a = d_qkv * params_[blk.qkv_w].value;
    dh_res = d_mid + layer_norm_backward(d_a, c.ln1, params_[blk.ln1_g], params_[blk.ln1_b]);
  }

  params_[pos_].grad.topRows(n) += dh_res;
  dense_backward(inputs, dh_res, params_[in_w_], params_[in_b_]);
  return loss_value;
}

Checkpoint TransformerPredictor::to_checkpoint() const {
  nlohmann::json meta = {{"kind", "ntp_transformer"},
                         {"input_dim", cfg_.input_dim},
                         {"d_model", cfg_.d_model},
                         {"layers", cfg_.layers},
                         {"heads", cfg_.heads},
                         {"ff_dim", cfg_.ff_dim},
                         {"max_len", cfg_.max_len},
                         {"standardize", standardizes()}};
  Checkpoint ckpt = probekit::to_checkpoint(params_, std::move(meta));
  if (mean_) {
    ckpt.tensors.emplace_back("standardizer.mean", mean_->transpose());
    ckpt.tensors.emplace_back("standardizer.scale", scale_->transpose());
  }
  return ckpt;
}

TransformerPredictor TransformerPredictor::from_checkpoint(const Checkpoint& ckpt) {
  expect_kind(ckpt, "ntp_transformer");
  TransformerConfig cfg;
  cfg.input_dim = ckpt.meta.at("input_dim").get<Eigen::Index>();
  cfg.d_model = ckpt.meta.at("d_model").get<Eigen::Index>();
  cfg.layers = ckpt.meta.at("layers").get<int>();
  cfg.heads = ckpt.meta.at("heads").get<int>();
  cfg.ff_dim = ckpt.meta.at("ff_dim").get<Eigen::Index>();
  cfg.max_len = ckpt.meta.at("max_len").get<Eigen::Index>();
  Rng unused(0);
  TransformerPredictor model(cfg, unused);
  load_params(model.params_, ckpt);
  if (ckpt.meta.value("standardize", false)) {
    model.set_standardizer(ckpt.tensor("standardizer.mean").row(0).transpose(),
                           ckpt.tensor("standardizer.scale").row(0).transpose());
  }
  return model;
}

namespace {

std::vector<Eigen::MatrixXd> usable(std::span<const Eigen::MatrixXd> seqs, Eigen::Index max_len,
                                    const char* split) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].rows() < 2) {
      spdlog::warn("ntp: skipping {} video {} with {} frame(s)", split, i, seqs[i].rows());
      continue;
    }
    out.push_back(seqs[i].topRows(std::min(seqs[i].rows(), max_len)));
  }
  if (out.empty()) throw Error(std::string("ntp: no usable ") + split + " videos");
  return out;
}

}  // namespace

TransformerPredictor ntp_train(std::span<const Eigen::MatrixXd> train,
                               std::span<const Eigen::MatrixXd> val, const NtpTrainConfig& cfg,
                               TrainHistory* history) {
  if (train.empty() || val.empty()) throw Error("ntp_train needs non-empty train and val sets");
  if (cfg.batch_videos < 1 || cfg.max_epochs < 1) throw Error("invalid ntp training config");
  TransformerConfig arch = cfg.arch;
  arch.input_dim = train.front().cols();
  for (const auto& s : train) {
    if (s.cols() != arch.input_dim) throw Error("dimension mismatch across training videos");
  }
  for (const auto& s : val) {
    if (s.cols() != arch.input_dim) throw Error("dimension mismatch between train and val");
  }

  const Rng base(cfg.seed);
  Rng init_rng = base.split("ntp.init");
  Rng shuffle_rng = base.split("ntp.shuffle");
  TransformerPredictor model(arch, init_rng);

  std::vector<Eigen::MatrixXd> train_set = usable(train, arch.max_len, "train");
  std::vector<Eigen::MatrixXd> val_set = usable(val, arch.max_len, "val");
  if (cfg.standardize) {
    Eigen::Index rows = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(arch.input_dim);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(arch.input_dim);
    for (const auto& s : train_set) {
      rows += s.rows();
      sum += s.colwise().sum().transpose();
      sq += s.array().square().colwise().sum().matrix().transpose();
    }
    const Eigen::VectorXd mean = sum / static_cast<double>(rows);
    const Eigen::VectorXd var = sq / static_cast<double>(rows) - mean.cwiseProduct(mean);
    model.set_standardizer(mean, var.cwiseMax(1e-12).cwiseSqrt());
    for (auto& s : train_set) s = model.preprocess(s);
    for (auto& s : val_set) s = model.preprocess(s);
  }

  EarlyStopping stopper(cfg.early_stop_patience);
  std::vector<Eigen::MatrixXd> best = model.params().snapshot();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_videos);
  std::int64_t step = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const AdamConfig adam{.lr = cosine_lr(epoch, cfg.max_epochs, cfg.lr0)};
    shuffle_rng.shuffle(std::span(order));
    double train_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      const double w = 1.0 / static_cast<double>(hi - lo);
      model.params().zero_grad();
      for (std::size_t k = lo; k < hi; ++k) train_loss += model.loss(train_set[order[k]], true, w);
      adam_step(model.params(), adam, ++step);
    }
    train_loss /= static_cast<double>(order.size());
    double val_loss = 0.0;
    for (const auto& s : val_set) val_loss += model.loss(s, false);
    val_loss /= static_cast<double>(val_set.size());
    if (history != nullptr) {
      history->train_loss.push_back(train_loss);
      history->val_loss.push_back(val_loss);
      history->lr.push_back(adam.lr);
    }
    spdlog::info("ntp epoch {}: lr {:.3g} train {:.6f} val {:.6f}", epoch, adam.lr, train_loss,
                 val_loss);
    if (stopper.update(val_loss)) best = model.params().snapshot();
    if (stopper.should_stop()) break;
  }
  model.params().restore(best);
  model.params().zero_grad();
  if (history != nullptr) history->best_epoch = stopper.best_epoch();
  return model;
}

TransformerPredictor ntp_train(const DatasetManifest& train, const DatasetManifest& val,
                               const std::string& key, const NtpTrainConfig& cfg,
                               TrainHistory* history) {
  std::vector<Eigen::MatrixXd> train_seqs;
  std::vector<Eigen::MatrixXd> val_seqs;
  for (const auto* m : {&train, &val}) {
    for (const VideoRecord& r : m->records) {
      if (r.label != 0) {
        throw Error("next-token prediction trains on real videos only; '" + r.id + "' is fake");
      }
    }
  }
  for (const VideoRecord& r : train.records) train_seqs.push_back(load_stream(r, key).as_double());
  for (const VideoRecord& r : val.records) val_seqs.push_back(load_stream(r, key).as_double());
  return ntp_train(train_seqs, val_seqs, cfg, history);
}

Eigen::MatrixXd ntp_forward(const TransformerPredictor& model, const Eigen::MatrixXd& seq) {
  return model.forward(seq);
}

Eigen::VectorXd ntp_frame_errors(const TransformerPredictor& model, const Eigen::MatrixXd& seq) {
  if (seq.rows() < 2) throw Error("ntp_score needs T >= 2");
  const Eigen::MatrixXd x =
      model.preprocess(seq.topRows(std::min(seq.rows(), model.config().max_len)));
  const Eigen::MatrixXd diff = model.forward(x) - x.bottomRows(x.rows() - 1);
  return diff.rowwise().squaredNorm() / static_cast<double>(x.cols());
}

double ntp_score(const TransformerPredictor& model, const Eigen::MatrixXd& seq) {
  return ntp_frame_errors(model, seq).maxCoeff();
}

}  // namespace probekit
