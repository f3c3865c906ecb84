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

#include "probekit/nn.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "probekit/error.h"

namespace probekit {

double logsumexp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw Error("logsumexp of an empty vector");
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  Eigen::VectorXd e = (x.array() - m).exp();
  return e / e.sum();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Eigen::MatrixXd dense_forward(const Eigen::MatrixXd& x, const Tensor& w, const Tensor& b) {
  Eigen::MatrixXd y = x * w.value.transpose();
  y.rowwise() += b.value.row(0);
  return y;
}

Eigen::MatrixXd dense_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy, Tensor& w,
                               Tensor& b) {
  w.grad.noalias() += dy.transpose() * x;
  b.grad.row(0) += dy.colwise().sum();
  return dy * w.value;
}

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x, const Tensor& gamma,
                                   const Tensor& beta, LayerNormCache* cache) {
  const Eigen::Index n = x.cols();
  const Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::MatrixXd centered = x.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().sum() / static_cast<double>(n);
  const Eigen::VectorXd inv_std = (var.array() + kLayerNormEps).rsqrt();
  Eigen::MatrixXd xhat = centered.array().colwise() * inv_std.array();
  Eigen::MatrixXd y = xhat.array().rowwise() * gamma.value.row(0).array();
  y.rowwise() += beta.value.row(0);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv_std;
  }
  return y;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LayerNormCache& cache,
                                    Tensor& gamma, Tensor& beta) {
  const double n = static_cast<double>(dy.cols());
  gamma.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  beta.grad.row(0) += dy.colwise().sum();
  const Eigen::MatrixXd dxhat = dy.array().rowwise() * gamma.value.row(0).array();
  const Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
  const Eigen::VectorXd sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum();
  Eigen::MatrixXd dx = n * dxhat;
  dx.colwise() -= sum_dxhat;
  dx.array() -= cache.xhat.array().colwise() * sum_dxhat_xhat.array();
  dx.array().colwise() *= cache.inv_std.array() / n;
  return dx;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Eigen::MatrixXd gelu_forward(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
}

Eigen::MatrixXd gelu_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) {
  const Eigen::MatrixXd dgelu = x.unaryExpr([](double v) {
    const double u = kGeluC * (v + kGeluA * v * v * v);
    const double th = std::tanh(u);
    const double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du;
  });
  return dy.cwiseProduct(dgelu);
}

Eigen::MatrixXd relu_forward(const Eigen::MatrixXd& x) { return x.cwiseMax(0.0); }

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) {
  return (x.array() > 0.0).select(dy, 0.0);
}

}  // namespace probekit
