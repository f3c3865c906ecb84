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

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#ifndef PROBEKIT_CLI_H_
#define PROBEKIT_CLI_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "probekit/manifest.h"
#include "probekit/metrics.h"
#include "probekit/predictions.h"

namespace probekit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct EvalRow {
  std::string run;
  std::size_t videos = 0;
  double auc = 0.0;
  double ap = 0.0;
  std::optional<LocalizationResult> localization;
};

// Scores predictions against manifest labels. Prediction and manifest ids
// must match one to one. Localization AUC is computed over fake videos with
// segments when the predictions carry frame scores.
EvalRow eval_report(const std::vector<Prediction>& predictions, const DatasetManifest& manifest,
                    std::string run_name);

std::string eval_csv(const std::vector<EvalRow>& rows);
std::string eval_json(const std::vector<EvalRow>& rows);

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace probekit

#endif  // PROBEKIT_CLI_H_
