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

#include <fstream>

#include <doctest.h>

#include "probekit/checkpoint.h"
#include "probekit/error.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::TempDir;

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip preserves meta and tensors exactly") {
    TempDir dir("ckpt");
    Rng rng(0);
    ParamSet p;
    p.add("a.w", 3, 4, InitScheme::kNormal002, rng);
    p.add("a.b", 1, 4, InitScheme::kNormal002, rng);
    const Checkpoint c = to_checkpoint(p, {{"kind", "test"}, {"width", 4}});
    write_checkpoint(c, dir / "m.pkpt");
    const Checkpoint back = read_checkpoint(dir / "m.pkpt");
    CHECK(back.meta.at("width") == 4);
    CHECK(back.tensor("a.w") == p[0].value);
    CHECK(back.tensor("a.b") == p[1].value);
    CHECK_THROWS_AS(back.tensor("zzz"), Error);

    ParamSet q;
    Rng other(99);
    q.add("a.w", 3, 4, InitScheme::kZeros, other);
    q.add("a.b", 1, 4, InitScheme::kZeros, other);
    load_params(q, back);
    CHECK(q[0].value == p[0].value);
    expect_kind(back, "test");
    CHECK_THROWS_AS(expect_kind(back, "other"), Error);
  }

  TEST_CASE("shape mismatch and missing tensors are rejected") {
    Rng rng(0);
    ParamSet p;
    p.add("w", 2, 2, InitScheme::kZeros, rng);
    const Checkpoint c = to_checkpoint(p, {{"kind", "x"}});
    ParamSet wrong;
    wrong.add("w", 2, 3, InitScheme::kZeros, rng);
    CHECK_THROWS_AS(load_params(wrong, c), Error);
    ParamSet missing;
    missing.add("v", 2, 2, InitScheme::kZeros, rng);
    CHECK_THROWS_AS(load_params(missing, c), Error);
  }

  TEST_CASE("corrupt files are rejected") {
    TempDir dir("ckpt");
    Rng rng(0);
    ParamSet p;
    p.add("w", 5, 5, InitScheme::kNormal002, rng);
    write_checkpoint(to_checkpoint(p, {{"kind", "x"}}), dir / "good.pkpt");
    std::ifstream in(dir / "good.pkpt", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes.substr(0, 4) == "PKPT");

    const auto write = [&](const std::string& b) {
      std::ofstream out(dir / "bad.pkpt", std::ios::binary | std::ios::trunc);
      out << b;
    };
    write(bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_checkpoint(dir / "bad.pkpt"), Error);
    write(bytes + "x");
    CHECK_THROWS_AS(read_checkpoint(dir / "bad.pkpt"), Error);
    std::string magic = bytes;
    magic[0] = 'X';
    write(magic);
    CHECK_THROWS_AS(read_checkpoint(dir / "bad.pkpt"), Error);
    std::string version = bytes;
    version[4] = 9;
    write(version);
    CHECK_THROWS_AS(read_checkpoint(dir / "bad.pkpt"), Error);
  }
}

}  // namespace
}  // namespace probekit
