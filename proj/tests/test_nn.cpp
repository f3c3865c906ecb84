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

#include <cmath>

#include <doctest.h>

#include "probekit/grad_check.h"
#include "probekit/nn.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::random_matrix;

TEST_SUITE("nn") {
  TEST_CASE("logsumexp and softmax") {
    Eigen::VectorXd x(2);
    x << 0.0, 10.0;
    CHECK(logsumexp(x) == doctest::Approx(10.0 + std::log1p(std::exp(-10.0))).epsilon(1e-15));
    CHECK(logsumexp(x) == doctest::Approx(10.0000454).epsilon(1e-8));
    x << 1000.0, 1000.0;
    CHECK(logsumexp(x) == doctest::Approx(1000.0 + std::log(2.0)));
    const Eigen::VectorXd p = softmax(x);
    CHECK(p(0) == doctest::Approx(0.5));
    Eigen::VectorXd y(3);
    y << -800.0, 0.0, 3.0;
    const Eigen::VectorXd q = softmax(y);
    CHECK(q.sum() == doctest::Approx(1.0));
    CHECK(q(0) >= 0.0);
  }

  TEST_CASE("sigmoid and softplus are stable") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(std::isfinite(softplus(800.0)));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(-50.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-6));
  }

  TEST_CASE("dense forward matches a scalar loop") {
    Rng rng(0);
    ParamSet p;
    const auto w = p.add("w", 4, 3, InitScheme::kNormal002, rng);
    const auto b = p.add("b", 1, 4, InitScheme::kNormal002, rng);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 3);
    const Eigen::MatrixXd y = dense_forward(x, p[w], p[b]);
    for (int i = 0; i < 5; ++i) {
      for (int o = 0; o < 4; ++o) {
        double acc = p[b].value(0, o);
        for (int k = 0; k < 3; ++k) acc += x(i, k) * p[w].value(o, k);
        CHECK(y(i, o) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("layer norm normalizes rows") {
    Rng rng(1);
    ParamSet p;
    const auto g = p.add("g", 1, 6, InitScheme::kOnes, rng);
    const auto b = p.add("b", 1, 6, InitScheme::kZeros, rng);
    const Eigen::MatrixXd x = random_matrix(rng, 4, 6, 3.0);
    LayerNormCache cache;
    const Eigen::MatrixXd y = layer_norm_forward(x, p[g], p[b], &cache);
    for (int i = 0; i < 4; ++i) {
      const double mean = x.row(i).mean();
      const double var = (x.row(i).array() - mean).square().mean();
      for (int j = 0; j < 6; ++j) {
        CHECK(y(i, j) == doctest::Approx((x(i, j) - mean) / std::sqrt(var + kLayerNormEps)));
      }
    }
  }

  TEST_CASE("composite dense, layer norm, and activations pass grad_check") {
    Rng rng(2);
    ParamSet p;
    const auto w1 = p.add("w1", 7, 5, InitScheme::kNormal002, rng);
    const auto b1 = p.add("b1", 1, 7, InitScheme::kNormal002, rng);
    const auto g = p.add("g", 1, 7, InitScheme::kOnes, rng);
    const auto be = p.add("be", 1, 7, InitScheme::kZeros, rng);
    const auto w2 = p.add("w2", 3, 7, InitScheme::kNormal002, rng);
    const auto b2 = p.add("b2", 1, 3, InitScheme::kZeros, rng);
    for (auto& t : p) t.value = random_matrix(rng, t.value.rows(), t.value.cols(), 0.7);
    const Eigen::MatrixXd x = random_matrix(rng, 6, 5);
    const Eigen::MatrixXd target = random_matrix(rng, 6, 3);

    for (bool use_gelu : {true, false}) {
      const LossFn loss = [&](bool grad) {
        const Eigen::MatrixXd z = dense_forward(x, p[w1], p[b1]);
        LayerNormCache c;
        const Eigen::MatrixXd n = layer_norm_forward(z, p[g], p[be], &c);
        const Eigen::MatrixXd a = use_gelu ? gelu_forward(n) : relu_forward(n);
        const Eigen::MatrixXd y = dense_forward(a, p[w2], p[b2]);
        const Eigen::MatrixXd diff = y - target;
        if (grad) {
          const Eigen::MatrixXd dy = 2.0 * diff / static_cast<double>(diff.size());
          const Eigen::MatrixXd da = dense_backward(a, dy, p[w2], p[b2]);
          const Eigen::MatrixXd dn = use_gelu ? gelu_backward(n, da) : relu_backward(n, da);
          const Eigen::MatrixXd dz = layer_norm_backward(dn, c, p[g], p[be]);
          dense_backward(x, dz, p[w1], p[b1]);
        }
        return diff.squaredNorm() / static_cast<double>(diff.size());
      };
      const GradCheckResult r = grad_check(loss, p, 200);
      INFO("gelu=" << use_gelu << " worst " << r.worst_tensor);
      CHECK(r.max_rel_error < 1e-6);
    }
  }

  TEST_CASE("gelu values") {
    Eigen::MatrixXd x(1, 3);
    x << 0.0, 10.0, -10.0;
    const Eigen::MatrixXd y = gelu_forward(x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == doctest::Approx(10.0));
    CHECK(std::abs(y(0, 2)) < 1e-6);
  }
}

}  // namespace
}  // namespace probekit
