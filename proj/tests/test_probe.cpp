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
#include "probekit/grad_check.h"
#include "probekit/metrics.h"
#include "probekit/nn.h"
#include "probekit/probe.h"
#include "probekit/synthetic.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::random_matrix;
using testing::TempDir;

std::vector<LabeledSequence> to_labeled(const std::vector<SynthVideo>& videos) {
  std::vector<LabeledSequence> out;
  for (const SynthVideo& v : videos) {
    out.push_back({v.record.id, v.record.label, v.streams.begin()->second.as_double()});
  }
  return out;
}

double train_auc(const LinearProbe& probe, const std::vector<LabeledSequence>& set) {
  LabeledScores ls;
  for (const auto& s : set) {
    ls.scores.push_back(video_score(probe, s.frames));
    ls.labels.push_back(s.label);
  }
  return roc_auc(ls);
}

TEST_SUITE("probe") {
  TEST_CASE("frame scores") {
    LinearProbe zero(3);
    Rng rng(0);
    CHECK(frame_scores(zero, random_matrix(rng, 4, 3)).isZero());

    LinearProbe p(2);
    p.set_weights(Eigen::Vector2d(1.0, 0.0));
    p.set_bias(1.0);
    Eigen::MatrixXd f(1, 2);
    f << 2.0, 5.0;
    CHECK(frame_scores(p, f)(0) == 3.0);
    CHECK_THROWS_AS(frame_scores(p, random_matrix(rng, 2, 3)), Error);
  }

  TEST_CASE("frame scores match a scalar loop") {
    Rng rng(11);
    LinearProbe p = LinearProbe::initialized(8, rng);
    p.set_bias(0.3);
    const Eigen::MatrixXd f = random_matrix(rng, 5, 8);
    const Eigen::VectorXd s = frame_scores(p, f);
    const Eigen::VectorXd w = p.weights();
    for (int t = 0; t < 5; ++t) {
      double acc = 0.3;
      for (int d = 0; d < 8; ++d) acc += w(d) * f(t, d);
      CHECK(std::abs(s(t) - acc) <= 1e-12);
    }
  }

  TEST_CASE("video score is log-sum-exp of frame scores") {
    LinearProbe p(1);
    p.set_weights(Eigen::VectorXd::Ones(1));
    Eigen::MatrixXd one(1, 1);
    one << 1.7;
    CHECK(video_score(p, one) == doctest::Approx(1.7));
    Eigen::MatrixXd two(2, 1);
    two << 1.7, 1.7;
    CHECK(video_score(p, two) == doctest::Approx(1.7 + std::log(2.0)));
    two << 0.0, 10.0;
    CHECK(video_score(p, two) == doctest::Approx(10.0000454).epsilon(1e-8));
  }

  TEST_CASE("lse sandwich and bias shift") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(6));
      const Eigen::Index t = 1 + static_cast<Eigen::Index>(rng.index(50));
      LinearProbe p = LinearProbe::initialized(d, rng);
      p.set_weights(random_matrix(rng, d, 1, 3.0).col(0));
      const Eigen::MatrixXd f = random_matrix(rng, t, d);
      const Eigen::VectorXd s = frame_scores(p, f);
      const double v = video_score(p, f);
      CHECK(s.maxCoeff() <= v + 1e-12);
      CHECK(v <= s.maxCoeff() + std::log(static_cast<double>(t)) + 1e-12);
      const double c = rng.uniform(-5.0, 5.0);
      LinearProbe q = p;
      q.set_bias(p.bias() + c);
      CHECK(video_score(q, f) == doctest::Approx(v + c).epsilon(1e-12));
      CHECK((frame_scores(q, f) - s).array().isApprox(Eigen::ArrayXd::Constant(t, c), 1e-12));
    }
  }

  TEST_CASE("BCE gradient passes grad_check") {
    Rng rng(5);
    LinearProbe p = LinearProbe::initialized(6, rng);
    p.set_weights(random_matrix(rng, 6, 1, 0.5).col(0));
    p.set_bias(-0.2);
    std::vector<LabeledSequence> videos;
    for (int i = 0; i < 10; ++i) {
      videos.push_back({"v" + std::to_string(i), i % 2,
                        random_matrix(rng, 3 + static_cast<Eigen::Index>(rng.index(20)), 6)});
    }
    const LossFn loss = [&](bool grad) { return probe_loss(p, videos, grad); };
    CHECK(grad_check(loss, p.params(), 7).max_rel_error < 1e-4);
  }

  TEST_CASE("training is deterministic and fits separable data") {
    SynthSpec spec;
    spec.n_real = 60;
    spec.n_fake = 60;
    spec.ar_coeff = 0.0;
    const auto train = to_labeled(gen_split(spec, "train"));
    const auto val = to_labeled(gen_split(spec, "val"));
    ProbeTrainConfig cfg;
    cfg.seed = 3;
    cfg.lr = 1e-2;
    cfg.batch_videos = 8;
    TrainHistory h;
    const LinearProbe a = train_probe(train, val, cfg, &h);
    const LinearProbe b = train_probe(train, val, cfg);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
    CHECK(train_auc(a, train) >= 0.99);
    REQUIRE(h.best_epoch >= 0);
    CHECK(h.val_loss.size() == h.train_loss.size());
    CHECK(h.val_loss.size() <= 100);
  }

  TEST_CASE("single-class splits are rejected") {
    Rng rng(0);
    std::vector<LabeledSequence> reals;
    for (int i = 0; i < 4; ++i) reals.push_back({"r" + std::to_string(i), 0, random_matrix(rng, 5, 2)});
    std::vector<LabeledSequence> mixed = reals;
    mixed[0].label = 1;
    CHECK_THROWS_WITH(train_probe(reals, mixed, ProbeTrainConfig{}),
                      doctest::Contains("degenerate labels"));
    CHECK_THROWS_WITH(train_probe(mixed, reals, ProbeTrainConfig{}),
                      doctest::Contains("degenerate labels"));
    mixed[1].frames = random_matrix(rng, 5, 3);
    CHECK_THROWS_AS(train_probe(mixed, mixed, ProbeTrainConfig{}), Error);
  }

  TEST_CASE("predict collects failures and keeps order") {
    TempDir dir("probe");
    SynthSpec spec;
    spec.n_real = 2;
    spec.n_fake = 2;
    DatasetManifest m = gen_dataset(spec, "test", dir.path());
    Rng rng(0);
    const LinearProbe p = LinearProbe::initialized(spec.dim, rng);

    CHECK(predict(p, DatasetManifest{}, "visual").reports.empty());

    const PredictResult ok = predict(p, m, "visual", 3);
    REQUIRE(ok.reports.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(ok.reports[i].video_id == m.records[i].id);
      CHECK(std::abs(ok.reports[i].video_score - logsumexp(ok.reports[i].frame_scores)) <= 1e-9);
      CHECK(ok.reports[i].video_prob > 0.0);
      CHECK(ok.reports[i].video_prob < 1.0);
    }

    DatasetManifest broken;
    broken.records.push_back(m.records[0]);
    broken.records[0].features["visual"] = dir / "missing.fseq";
    const PredictResult bad = predict(p, broken, "visual");
    CHECK(bad.reports.empty());
    REQUIRE(bad.failures.size() == 1);
    CHECK(bad.failures[0].id == m.records[0].id);
  }

  TEST_CASE("checkpoint round trip") {
    Rng rng(8);
    LinearProbe p = LinearProbe::initialized(5, rng);
    p.set_bias(0.25);
    const LinearProbe q = LinearProbe::from_checkpoint(p.to_checkpoint());
    CHECK(q.weights() == p.weights());
    CHECK(q.bias() == 0.25);
  }
}

}  // namespace
}  // namespace probekit
