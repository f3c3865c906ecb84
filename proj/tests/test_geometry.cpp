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

#include <cmath>

#include <doctest.h>

#include "probekit/error.h"
#include "probekit/geometry.h"
#include "test_util.h"

namespace probekit {
namespace {

FeatureSequence counting(Eigen::Index t, Eigen::Index d, float fps = 50.0f) {
  FeatureSequence s;
  s.modality = Modality::kAudio;
  s.fps = fps;
  s.data.resize(t, d);
  for (Eigen::Index i = 0; i < s.data.size(); ++i) s.data.data()[i] = static_cast<float>(i);
  return s;
}

TEST_SUITE("geometry") {
  TEST_CASE("pair_downsample concatenates consecutive frames") {
    const FeatureSequence s = counting(4, 2);
    const FeatureSequence p = pair_downsample(s);
    REQUIRE(p.frames() == 2);
    REQUIRE(p.dim() == 4);
    CHECK(p.fps == 25.0f);
    CHECK(p.modality == Modality::kAudio);
    for (Eigen::Index k = 0; k < 2; ++k) {
      CHECK(p.data.row(k).head(2) == s.data.row(2 * k));
      CHECK(p.data.row(k).tail(2) == s.data.row(2 * k + 1));
    }
  }

  TEST_CASE("pair_downsample drops an odd trailing frame") {
    const FeatureSequence p = pair_downsample(counting(5, 3));
    CHECK(p.frames() == 2);
    CHECK(p.data(1, 5) == 11.0f);  // row 3, last column
    CHECK_THROWS_AS(pair_downsample(counting(1, 3)), Error);
  }

  TEST_CASE("pair_downsample flattening recovers the input prefix") {
    for (Eigen::Index t = 2; t < 12; ++t) {
      const FeatureSequence s = counting(t, 3);
      const FeatureSequence p = pair_downsample(s);
      const Eigen::Index kept = 2 * (t / 2);
      // Row-major storage makes flattening a plain memory comparison.
      REQUIRE(p.data.size() == kept * 3);
      for (Eigen::Index i = 0; i < p.data.size(); ++i) {
        CHECK(p.data.data()[i] == s.data.data()[i]);
      }
    }
  }

  TEST_CASE("trim_align truncates at the end") {
    auto [a, v] = trim_align(counting(10, 2), counting(7, 3));
    CHECK(a.frames() == 7);
    CHECK(v.frames() == 7);
    CHECK(a.data == counting(10, 2).data.topRows(7));

    auto [a2, v2] = trim_align(counting(5, 2), counting(5, 2));
    CHECK(bit_equal(a2, counting(5, 2)));

    auto [a3, v3] = trim_align(counting(1, 2), counting(100, 2));
    CHECK(a3.frames() == 1);
    CHECK(v3.frames() == 1);

    auto [a4, v4] = trim_align(a, v);
    CHECK(bit_equal(a4, a));
    CHECK(bit_equal(v4, v));
  }

  TEST_CASE("chunk_windows") {
    CHECK(chunk_windows(33, 16, 16) == std::vector<Window>{{0, 16}, {16, 32}});
    CHECK(chunk_windows(16, 16, 16) == std::vector<Window>{{0, 16}});
    CHECK(chunk_windows(15, 16, 16).empty());
    CHECK_THROWS_AS(chunk_windows(10, 0, 1), Error);
    CHECK_THROWS_AS(chunk_windows(10, 1, 0), Error);
  }

  TEST_CASE("chunk_windows count formula") {
    for (std::size_t t = 0; t < 60; ++t) {
      for (std::size_t w = 1; w < 20; w += 3) {
        for (std::size_t s = 1; s < 20; s += 4) {
          const std::size_t expected = t >= w ? (t - w) / s + 1 : 0;
          const auto ws = chunk_windows(t, w, s);
          REQUIRE(ws.size() == expected);
          for (const Window& win : ws) CHECK(win.end <= t);
        }
      }
    }
  }

  TEST_CASE("frame_labels midpoint rule") {
    CHECK(frame_labels({}, 10, 25.0) == std::vector<int>(10, 0));
    CHECK(frame_labels({{0.0, 10 / 25.0}}, 10, 25.0) == std::vector<int>(10, 1));
    const auto labels = frame_labels({{0.4, 0.6}}, 25, 25.0);
    for (int t = 0; t < 25; ++t) CHECK(labels[t] == (t >= 10 && t <= 14 ? 1 : 0));
  }

  TEST_CASE("frame_labels matches a per-frame brute force") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const double fps = rng.uniform(5.0, 60.0);
      const std::size_t frames = 1 + rng.index(200);
      std::vector<ManipulationSegment> segs;
      for (std::size_t k = rng.index(4); k > 0; --k) {
        const double a = rng.uniform(0.0, frames / fps);
        segs.push_back({a, a + rng.uniform(0.01, 2.0)});
      }
      const auto labels = frame_labels(segs, frames, fps);
      REQUIRE(labels.size() == frames);
      for (std::size_t t = 0; t < frames; ++t) {
        const double mid = (static_cast<double>(t) + 0.5) / fps;
        int expected = 0;
        for (const auto& s : segs) {
          if (s.start_s <= mid && mid < s.end_s) expected = 1;
        }
        CHECK(labels[t] == expected);
      }
    }
  }
}

}  // namespace
}  // namespace probekit
