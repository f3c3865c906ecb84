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

#ifndef PROBEKIT_ERROR_H_
#define PROBEKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace probekit {

// Thrown for invalid inputs and data problems (exit code 2 at the CLI).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FseqError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kVersionMismatch, kTruncated, kNonFinite, kMalformed };

  FseqError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace probekit

#endif  // PROBEKIT_ERROR_H_
