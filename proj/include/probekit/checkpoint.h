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

// PKPT: named-tensor checkpoint container.
//
//   0..3     magic "PKPT"
//   4        version (1)
//   5..7     reserved, zero
//   8..11    u32 metadata length M
//   12..     M bytes of UTF-8 JSON metadata (model kind and hyperparameters)
//   ...      u32 tensor count N
//   N times: u32 name length, name bytes, u32 rows, u32 cols
//   ...      payloads in table order, each rows*cols f64 values, row-major
//
// All integers and floats are little-endian.

#ifndef PROBEKIT_CHECKPOINT_H_
#define PROBEKIT_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "probekit/params.h"

namespace probekit {

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  const Eigen::MatrixXd& tensor(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint to_checkpoint(const ParamSet& params, nlohmann::json meta);
// Copies values by name; every tensor in `params` must be present with the
// same shape.
void load_params(ParamSet& params, const Checkpoint& ckpt);

// Throws unless meta["kind"] equals `expected`.
void expect_kind(const Checkpoint& ckpt, const std::string& expected);

}  // namespace probekit

#endif  // PROBEKIT_CHECKPOINT_H_
