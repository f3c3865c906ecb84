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

#include "probekit/schedule.h"

#include <cmath>
#include <numbers>
#include <string>

#include "probekit/error.h"

namespace probekit {

double cosine_lr(int epoch, int total_epochs, double lr0) {
  if (total_epochs < 1 || epoch < 0 || epoch > total_epochs) {
    throw Error("cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                std::to_string(total_epochs) + "]");
  }
  if (epoch == total_epochs) return 0.0;
  const double phase = std::numbers::pi * epoch / total_epochs;
  return lr0 * 0.5 * (1.0 + std::cos(phase));
}

double PlateauScheduler::step(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
  }
  if (bad_epochs_ > patience_) {
    lr_ *= factor_;
    bad_epochs_ = 0;
  }
  return lr_;
}

bool EarlyStopping::update(double val_loss) {
  ++epoch_;
  if (val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epoch_;
    stale_epochs_ = 0;
    return true;
  }
  ++stale_epochs_;
  return false;
}

}  // namespace probekit
