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

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "probekit/cli.h"
#include "probekit/fseq.h"
#include "probekit/predictions.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  args.insert(args.begin(), "probekit");
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_SUITE("cli") {
  TEST_CASE("synthesize, train, predict, evaluate") {
    TempDir dir("cli");
    write_file(dir / "spec.json",
               R"({"dim": 6, "n_real": 20, "n_fake": 20, "t_min": 20, "t_max": 40, "ar_coeff": 0.5,
                   "shift_magnitude": 3.0, "splits": {"train": {}, "val": {"n_real": 10, "n_fake": 10},
                   "test": {}}})");
    const std::string d = dir.path().string();
    auto r = cli({"synth", "--spec", d + "/spec.json", "--out", d + "/data"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(std::filesystem::exists(dir / "data/spec.json"));

    r = cli({"train-probe", "--manifest", d + "/data/train.jsonl", "--val-manifest",
             d + "/data/val.jsonl", "--out", d + "/probe.ckpt", "--epochs", "60", "--lr", "1e-2", "--batch", "4"});
    REQUIRE_MESSAGE(r.code == 0, r.err);

    r = cli({"predict", "--manifest", d + "/data/test.jsonl", "--checkpoint", d + "/probe.ckpt",
             "--out", d + "/pred.jsonl", "--jobs", "2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto preds = read_predictions(dir / "pred.jsonl");
    REQUIRE(preds.size() == 40);
    CHECK(preds[0].prob.has_value());
    CHECK(!preds[0].frame_scores.empty());

    r = cli({"eval", "--manifest", d + "/data/test.jsonl", "--predictions", d + "/pred.jsonl",
             "--name", "probe", "--out", d + "/report"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("run,videos,auc,ap,loc_auc,loc_videos") != std::string::npos);
    CHECK(r.out.find("probe,40,") != std::string::npos);
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report[0]["auc"].get<double>() > 0.9);
    CHECK(report[0]["localization_auc"].get<double>() > 0.8);

    r = cli({"explain", "--manifest", d + "/data/test.jsonl", "--checkpoint", d + "/probe.ckpt",
             "--out", d + "/expl.jsonl"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(std::filesystem::file_size(dir / "expl.jsonl") > 0);

    // Two runs of the same model are perfectly correlated; fusing them is a no-op.
    r = cli({"correlate", "--predictions", d + "/pred.jsonl", "--predictions", d + "/pred.jsonl",
             "--name", "a", "--name", "b"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("model,a,b") != std::string::npos);
    r = cli({"fuse", "--predictions", d + "/pred.jsonl", "--predictions", d + "/pred.jsonl",
             "--out", d + "/fused.jsonl"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto fused = read_predictions(dir / "fused.jsonl");
    REQUIRE(fused.size() == preds.size());
    CHECK(fused[3].prob.value() == doctest::Approx(preds[3].prob.value()).epsilon(1e-12));

    r = cli({"validate", d + "/data/test.jsonl"});
    CHECK_MESSAGE(r.code == 0, r.err);
  }

  TEST_CASE("usage errors exit with 1") {
    CHECK(cli({"predict", "--bogus"}).code == kExitUsage);
    CHECK(cli({"nonsense"}).code == kExitUsage);
    CHECK(cli({"eval"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("data errors exit with 2") {
    TempDir dir("cli_err");
    const std::string d = dir.path().string();
    write_file(dir / "spec.json", R"({"dim": 3, "n_real": 4, "n_fake": 4, "t_min": 5, "t_max": 8})");
    REQUIRE(cli({"synth", "--spec", d + "/spec.json", "--out", d}).code == 0);

    // Single-class manifest.
    std::ifstream in(dir / "test.jsonl");
    std::string line, reals;
    std::vector<Prediction> preds;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j["label"].get<int>() != 0) continue;
      reals += line + "\n";
      preds.push_back({j["id"].get<std::string>(), 0.5, std::nullopt, {}});
    }
    write_file(dir / "reals.jsonl", reals);
    write_predictions(preds, dir / "p.jsonl");
    auto r = cli({"eval", "--manifest", d + "/reals.jsonl", "--predictions", d + "/p.jsonl"});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("degenerate labels") != std::string::npos);

    preds.pop_back();
    write_predictions(preds, dir / "p.jsonl");
    r = cli({"eval", "--manifest", d + "/reals.jsonl", "--predictions", d + "/p.jsonl"});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("no prediction for") != std::string::npos);

    write_file(dir / "bad.fseq", "not a feature file");
    r = cli({"validate", d + "/bad.fseq"});
    CHECK(r.code == kExitData);

    write_file(dir / "bad_spec.json", R"({"dim": 0})");
    CHECK(cli({"synth", "--spec", d + "/bad_spec.json", "--out", d + "/x"}).code == kExitData);
  }

  TEST_CASE("zero-shot grid") {
    TempDir dir("cli_zs");
    const std::string d = dir.path().string();
    write_file(dir / "spec.json",
               R"({"dim": 4, "n_real": 5, "n_fake": 5, "t_min": 30, "t_max": 40,
                   "fake_kind": "stream_shift", "shift_magnitude": 4, "identity_mixing": true,
                   "splits": {"test": {}}})");
    REQUIRE(cli({"synth", "--spec", d + "/spec.json", "--out", d}).code == 0);
    auto r = cli({"zero-shot-sync", "--manifest", d + "/test.jsonl", "--out", d + "/zs"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string csv = read_file(dir / "zs/auc.csv");
    CHECK(csv.rfind("pool,delta_0,delta_15", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    std::ifstream grid(dir / "zs/grid.jsonl");
    std::string line;
    REQUIRE(std::getline(grid, line));
    const auto row = nlohmann::json::parse(line);
    CHECK(row["scores"].size() == 7);
    CHECK(row["scores"]["average"].size() == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "zs/predictions.jsonl"));

    r = cli({"zero-shot-sync", "--manifest", d + "/test.jsonl", "--out", d + "/zs1", "--pool",
             "percentile_97", "--delta", "0"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(read_predictions(dir / "zs1/predictions.jsonl").size() == 10);
  }
}

}  // namespace
}  // namespace probekit
