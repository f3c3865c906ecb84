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

#ifndef PROBEKIT_PARAMS_H_
#define PROBEKIT_PARAMS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "probekit/rng.h"

namespace probekit {

enum class InitScheme { kNormal002, kZeros, kOnes };

// A trainable tensor with its gradient and Adam moment buffers.
struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
};

// Ordered collection of named tensors. Models refer to their tensors by the
// index returned from add(), so a ParamSet can be copied with its owner.
class ParamSet {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols, InitScheme init,
                  Rng& rng);

  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::size_t size() const { return tensors_.size(); }
  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  // Index of the tensor called `name`, or size() if absent.
  std::size_t find(const std::string& name) const;
  Eigen::Index total_size() const;

  void zero_grad();
  std::vector<Eigen::MatrixXd> snapshot() const;
  void restore(const std::vector<Eigen::MatrixXd>& values);

 private:
  std::vector<Tensor> tensors_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update; step_index counts from 1. Gradients are
// left in place for the caller to zero.
void adam_step(ParamSet& params, const AdamConfig& cfg, std::int64_t step_index);

}  // namespace probekit

#endif  // PROBEKIT_PARAMS_H_
