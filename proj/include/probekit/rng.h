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

#ifndef PROBEKIT_RNG_H_
#define PROBEKIT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace probekit {

// Seedable 64-bit generator. Sampling is implemented here rather than with
// <random> distributions so streams are identical across standard libraries.
//
// Streams: every component derives its own generator with
// `Rng(seed).split("<component>")`, e.g. "probe.init", "probe.shuffle",
// "ntp.init", "sync.shuffle", "synth.world". Per-item generators use
// `split(index)`. A split never advances the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::string_view stream) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace probekit

#endif  // PROBEKIT_RNG_H_
