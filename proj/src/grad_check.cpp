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

#include "probekit/grad_check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "probekit/error.h"

namespace probekit {

GradCheckResult grad_check(const LossFn& loss_fn, ParamSet& params, std::size_t probes, double h,
                           std::uint64_t seed) {
  if (!(h > 0.0)) throw Error("grad_check: h must be positive");
  const Eigen::Index total = params.total_size();
  if (total == 0) throw Error("grad_check: empty parameter set");

  params.zero_grad();
  loss_fn(true);
  std::vector<Eigen::MatrixXd> analytic;
  analytic.reserve(params.size());
  for (const Tensor& t : params) analytic.push_back(t.grad);

  Rng rng = Rng(seed).split("grad_check");
  GradCheckResult result;
  result.probes = probes;
  for (std::size_t p = 0; p < probes; ++p) {
    Eigen::Index flat = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(total)));
    std::size_t ti = 0;
    while (flat >= params[ti].value.size()) {
      flat -= params[ti].value.size();
      ++ti;
    }
    double& theta = params[ti].value.data()[flat];
    const double saved = theta;
    theta = saved + h;
    const double f_plus = loss_fn(false);
    theta = saved - h;
    const double f_minus = loss_fn(false);
    theta = saved;

    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double exact = analytic[ti].data()[flat];
    const double rel =
        std::abs(exact - numeric) / std::max(1e-12, std::abs(exact) + std::abs(numeric));
    if (rel > result.max_rel_error || result.worst_index < 0) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      result.worst_tensor = params[ti].name;
      result.worst_index = flat;
    }
  }
  params.zero_grad();
  return result;
}

}  // namespace probekit
