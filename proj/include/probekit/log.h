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

#ifndef PROBEKIT_LOG_H_
#define PROBEKIT_LOG_H_

namespace probekit {

// Reads PROBEKIT_LOG (trace|debug|info|warn|error|off) and configures the
// default stderr logger. Safe to call more than once.
void init_logging();

}  // namespace probekit

#endif  // PROBEKIT_LOG_H_
