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

// Dense kernels with hand-written backward passes. Activations are row-major
// in the logical sense: one row per frame or pair, one column per unit.
// Weights are stored (out x in) and biases (1 x out).

#ifndef PROBEKIT_NN_H_
#define PROBEKIT_NN_H_

#include <Eigen/Core>

#include "probekit/params.h"

namespace probekit {

double logsumexp(const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& x);
double sigmoid(double x);
// log(1 + exp(x)) without overflow.
double softplus(double x);

Eigen::MatrixXd dense_forward(const Eigen::MatrixXd& x, const Tensor& w, const Tensor& b);
// Accumulates dW and db; returns dL/dx.
Eigen::MatrixXd dense_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy, Tensor& w,
                               Tensor& b);

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Eigen::MatrixXd xhat;
  Eigen::VectorXd inv_std;
};

// Per-row normalization followed by the affine map gamma * xhat + beta.
Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x, const Tensor& gamma,
                                   const Tensor& beta, LayerNormCache* cache);
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LayerNormCache& cache,
                                    Tensor& gamma, Tensor& beta);

// tanh approximation of GELU.
Eigen::MatrixXd gelu_forward(const Eigen::MatrixXd& x);
Eigen::MatrixXd gelu_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy);

Eigen::MatrixXd relu_forward(const Eigen::MatrixXd& x);
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy);

}  // namespace probekit

#endif  // PROBEKIT_NN_H_
