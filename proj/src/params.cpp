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

#include "probekit/params.h"

#include <cmath>

#include "probekit/error.h"

namespace probekit {

std::size_t ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols,
                          InitScheme init, Rng& rng) {
  Tensor t;
  t.name = std::move(name);
  switch (init) {
    case InitScheme::kNormal002:
      t.value.resize(rows, cols);
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) t.value(i, j) = 0.02 * rng.normal();
      }
      break;
    case InitScheme::kZeros:
      t.value = Eigen::MatrixXd::Zero(rows, cols);
      break;
    case InitScheme::kOnes:
      t.value = Eigen::MatrixXd::Ones(rows, cols);
      break;
  }
  t.grad = Eigen::MatrixXd::Zero(rows, cols);
  t.m = Eigen::MatrixXd::Zero(rows, cols);
  t.v = Eigen::MatrixXd::Zero(rows, cols);
  tensors_.push_back(std::move(t));
  return tensors_.size() - 1;
}

std::size_t ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return i;
  }
  return tensors_.size();
}

Eigen::Index ParamSet::total_size() const {
  Eigen::Index n = 0;
  for (const Tensor& t : tensors_) n += t.value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (Tensor& t : tensors_) t.grad.setZero();
}

std::vector<Eigen::MatrixXd> ParamSet::snapshot() const {
  std::vector<Eigen::MatrixXd> values;
  values.reserve(tensors_.size());
  for (const Tensor& t : tensors_) values.push_back(t.value);
  return values;
}

void ParamSet::restore(const std::vector<Eigen::MatrixXd>& values) {
  if (values.size() != tensors_.size()) throw Error("snapshot size does not match parameter set");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != tensors_[i].value.rows() ||
        values[i].cols() != tensors_[i].value.cols()) {
      throw Error("snapshot shape mismatch for tensor '" + tensors_[i].name + "'");
    }
    tensors_[i].value = values[i];
  }
}

void adam_step(ParamSet& params, const AdamConfig& cfg, std::int64_t step_index) {
  if (step_index < 1) throw Error("adam_step: step_index must be >= 1");
  for (const Tensor& t : params) {
    if (!t.grad.allFinite()) throw Error("non-finite gradient in tensor '" + t.name + "'");
  }
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
  for (Tensor& t : params) {
    t.m = cfg.beta1 * t.m + (1.0 - cfg.beta1) * t.grad;
    t.v = cfg.beta2 * t.v + (1.0 - cfg.beta2) * t.grad.cwiseProduct(t.grad);
    t.value.array() -=
        cfg.lr * (t.m.array() / bc1) / ((t.v.array() / bc2).sqrt() + cfg.eps);
  }
}

}  // namespace probekit
