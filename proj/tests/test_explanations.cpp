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
#include "probekit/explanations.h"
#include "probekit/nn.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::random_matrix;
using testing::TempDir;

PatchFeatureSequence random_patches(Rng& rng, Eigen::Index t, Eigen::Index h, Eigen::Index w,
                                    Eigen::Index d) {
  PatchFeatureSequence p;
  p.rows = h;
  p.cols = w;
  for (Eigen::Index i = 0; i < t; ++i) p.frames.push_back(random_matrix(rng, h * w, d));
  return p;
}

TEST_SUITE("explanations") {
  TEST_CASE("temporal explanation") {
    FeatureSequence seq;
    seq.fps = 25.0f;
    seq.data = FrameMatrix::Random(20, 3);
    LinearProbe zero(3);
    const auto flat = temporal_explanation(zero, seq);
    REQUIRE(flat.size() == 20);
    for (const auto& e : flat) CHECK(e.prob == 0.5);
    CHECK(flat[10].time_s == doctest::Approx(0.42));

    Rng rng(1);
    LinearProbe p = LinearProbe::initialized(3, rng);
    p.set_bias(0.1);
    const auto ex = temporal_explanation(p, seq);
    const Eigen::VectorXd s = frame_scores(p, seq);
    for (int t = 0; t < 20; ++t) {
      CHECK(ex[t].score == s(t));
      CHECK(ex[t].prob == sigmoid(s(t)));
    }

    // frame t does not depend on later frames
    FeatureSequence prefix = seq;
    prefix.data = seq.data.topRows(7);
    const auto head = temporal_explanation(p, prefix);
    for (int t = 0; t < 7; ++t) CHECK(head[t].score == ex[t].score);
  }

  TEST_CASE("patch CAM decomposes the frame logit") {
    Rng rng(2);
    LinearProbe p = LinearProbe::initialized(3, rng);
    p.set_weights(random_matrix(rng, 3, 1).col(0));
    p.set_bias(-0.4);
    const PatchFeatureSequence ps = random_patches(rng, 2, 4, 3, 3);
    const auto maps = patch_cam(p, ps);
    REQUIRE(maps.size() == 2);
    const Eigen::VectorXd s = frame_scores(p, mean_pool(ps));
    const Eigen::VectorXd w = p.weights();
    for (std::size_t t = 0; t < 2; ++t) {
      REQUIRE(maps[t].rows() == 4);
      REQUIRE(maps[t].cols() == 3);
      for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
          double dot = 0.0;
          for (Eigen::Index d = 0; d < 3; ++d) dot += w(d) * ps.frames[t](i * 3 + j, d);
          CHECK(std::abs(maps[t](i, j) - dot) <= 1e-12);
        }
      }
      CHECK(std::abs(maps[t].mean() + p.bias() - s(t)) <= 1e-9);
    }

    LinearProbe zero(3);
    for (const auto& m : patch_cam(zero, ps)) CHECK(m.isZero());

    PatchFeatureSequence same = ps;
    same.frames[0].rowwise() = ps.frames[0].row(0);
    const auto cm = patch_cam(p, same);
    CHECK((cm[0].array() == cm[0](0, 0)).all());
    CHECK(std::abs(cm[0].mean() + p.bias() - frame_scores(p, mean_pool(same))(0)) <= 1e-9);

    PatchFeatureSequence bad = ps;
    bad.cols = 2;
    CHECK_THROWS_WITH(patch_cam(p, bad), doctest::Contains("layout mismatch"));
    CHECK_THROWS_AS(patch_cam(LinearProbe(4), ps), Error);
  }

  TEST_CASE("saliency peak") {
    CHECK(saliency_peak({0, Eigen::MatrixXd::Ones(1, 1)}) == RelativePoint{0.5, 0.5});
    Eigen::MatrixXd g(2, 2);
    g << 0, 5, 1, 2;
    CHECK(saliency_peak({0, g}) == RelativePoint{0.75, 0.25});
    const RelativePoint tie = saliency_peak({0, Eigen::MatrixXd::Constant(3, 3, 2.0)});
    CHECK(tie.x == doctest::Approx(1.0 / 6));
    CHECK(tie.y == doctest::Approx(1.0 / 6));

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index h = 1 + static_cast<Eigen::Index>(rng.index(9));
      const Eigen::Index w = 1 + static_cast<Eigen::Index>(rng.index(9));
      const Eigen::MatrixXd m = random_matrix(rng, h, w).cwiseAbs();
      const RelativePoint pt = saliency_peak({0, m});
      CHECK(pt.x >= 0.0);
      CHECK(pt.x <= 1.0);
      CHECK(pt.y >= 0.0);
      CHECK(pt.y <= 1.0);
    }
  }

  TEST_CASE("saliency and patch files round trip") {
    TempDir dir("expl");
    Rng rng(4);
    std::vector<SaliencyMap> maps;
    for (int t = 0; t < 3; ++t) {
      maps.push_back({t, random_matrix(rng, 2, 5).cwiseAbs().cast<float>().cast<double>()});
    }
    write_saliency(maps, dir / "s.fseq");
    CHECK(std::filesystem::exists(dir / "s.fseq.json"));
    const auto back = read_saliency(dir / "s.fseq");
    REQUIRE(back.size() == 3);
    for (int t = 0; t < 3; ++t) {
      CHECK(back[t].frame_index == t);
      CHECK(back[t].grid == maps[t].grid);
    }

    PatchFeatureSequence ps = random_patches(rng, 2, 2, 3, 4);
    for (auto& f : ps.frames) f = f.cast<float>().cast<double>();
    write_patch_features(ps, dir / "p.fseq");
    const PatchFeatureSequence pb = read_patch_features(dir / "p.fseq");
    CHECK(pb.rows == 2);
    CHECK(pb.cols == 3);
    REQUIRE(pb.frames.size() == 2);
    CHECK(pb.frames[1] == ps.frames[1]);

    std::filesystem::remove(dir / "p.fseq.json");
    CHECK_THROWS_AS(read_patch_features(dir / "p.fseq"), Error);
  }
}

}  // namespace
}  // namespace probekit
