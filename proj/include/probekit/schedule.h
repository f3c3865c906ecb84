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

#ifndef PROBEKIT_SCHEDULE_H_
#define PROBEKIT_SCHEDULE_H_

#include <limits>
#include <vector>

namespace probekit {

// lr0 * 0.5 * (1 + cos(pi * epoch / total_epochs)), for 0 <= epoch <= total.
double cosine_lr(int epoch, int total_epochs, double lr0);

// Reduce-on-plateau: the rate is multiplied by `factor` once more than
// `patience` consecutive epochs pass without a strict decrease of the best
// validation loss. The counter restarts after every reduction.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(double lr0, double factor = 0.1, int patience = 5)
      : lr_(lr0), factor_(factor), patience_(patience) {}

  // Feed one epoch's validation loss; returns the rate for the next epoch.
  double step(double val_loss);
  double lr() const { return lr_; }
  int bad_epochs() const { return bad_epochs_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

// Tracks the best validation loss; ties count as no improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true if `val_loss` is a new best.
  bool update(double val_loss);
  bool should_stop() const { return stale_epochs_ >= patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  int epoch_ = -1;
  int best_epoch_ = -1;
  int stale_epochs_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// Per-epoch losses recorded by the training loops.
struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> lr;
  int best_epoch = -1;
};

}  // namespace probekit

#endif  // PROBEKIT_SCHEDULE_H_
