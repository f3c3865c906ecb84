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

#include "probekit/log.h"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace probekit {

void init_logging() {
  static bool initialized = false;
  if (!initialized) {
    auto logger = spdlog::stderr_color_mt("probekit");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    initialized = true;
  }
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("PROBEKIT_LOG"); env != nullptr) {
    level = spdlog::level::from_str(env);
  }
  spdlog::set_level(level);
}

}  // namespace probekit
