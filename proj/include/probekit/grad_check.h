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

#ifndef PROBEKIT_GRAD_CHECK_H_
#define PROBEKIT_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "probekit/params.h"

namespace probekit {

// Evaluates the loss at the current parameter values. When the argument is
// true it must also accumulate d(loss)/d(theta) into each tensor's grad.
using LossFn = std::function<double(bool accumulate_grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
  std::size_t probes = 0;
};

// Compares the analytic gradient with central differences
// (f(theta + h) - f(theta - h)) / 2h on `probes` coordinates drawn uniformly
// over all tensors. The error at a coordinate is
// |ga - gn| / max(1e-12, |ga| + |gn|). Parameters are restored afterwards.
GradCheckResult grad_check(const LossFn& loss_fn, ParamSet& params, std::size_t probes,
                           double h = 1e-5, std::uint64_t seed = 0);

}  // namespace probekit

#endif  // PROBEKIT_GRAD_CHECK_H_
