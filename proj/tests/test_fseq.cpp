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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <doctest.h>

#include "probekit/error.h"
#include "probekit/fseq.h"
#include "test_util.h"

namespace probekit {
namespace {

using testing::TempDir;

FeatureSequence make_seq(Eigen::Index t, Eigen::Index d, Rng& rng) {
  FeatureSequence s;
  s.modality = static_cast<Modality>(rng.index(3));
  s.fps = static_cast<float>(rng.uniform(1.0, 100.0));
  s.data.resize(t, d);
  for (Eigen::Index i = 0; i < s.data.size(); ++i) {
    float v;
    do {
      v = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
    } while (!std::isfinite(v));
    s.data.data()[i] = v;
  }
  return s;
}

FseqError::Kind decode_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_fseq(bytes);
  } catch (const FseqError& e) {
    return e.kind();
  }
  FAIL("decode_fseq accepted malformed bytes");
  return FseqError::Kind::kIo;
}

TEST_SUITE("fseq") {
  TEST_CASE("single value round trip") {
    TempDir dir("fseq");
    FeatureSequence s;
    s.modality = Modality::kVisual;
    s.fps = 25.0f;
    s.data = FrameMatrix::Constant(1, 1, 0.5f);
    write_fseq(s, dir / "a.fseq");
    CHECK(bit_equal(read_fseq(dir / "a.fseq"), s));
    CHECK(std::filesystem::file_size(dir / "a.fseq") == 24);
  }

  TEST_CASE("header bytes follow the layout") {
    FeatureSequence s;
    s.modality = Modality::kAudio;
    s.fps = 50.0f;
    s.data.resize(3, 2);
    s.data << 1, 2, 3, 4, 5, 6;
    const auto bytes = encode_fseq(s);
    REQUIRE(bytes.size() == 20 + 24);
    CHECK(std::memcmp(bytes.data(), "FSEQ", 4) == 0);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 3);
    CHECK(bytes[12] == 2);
    // 50.0f = 0x42480000, little-endian
    CHECK(bytes[16] == 0x00);
    CHECK(bytes[17] == 0x00);
    CHECK(bytes[18] == 0x48);
    CHECK(bytes[19] == 0x42);
    // second payload value 2.0f = 0x40000000
    CHECK(bytes[24 + 3] == 0x40);
  }

  TEST_CASE("NaN payload is rejected on write") {
    TempDir dir("fseq");
    FeatureSequence s;
    s.data = FrameMatrix::Zero(2, 2);
    s.data(1, 0) = std::numeric_limits<float>::quiet_NaN();
    try {
      write_fseq(s, dir / "nan.fseq");
      FAIL("expected an error");
    } catch (const FseqError& e) {
      CHECK(e.kind() == FseqError::Kind::kNonFinite);
      CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
    CHECK_FALSE(std::filesystem::exists(dir / "nan.fseq"));
  }

  TEST_CASE("random 7x3 round trip, seed 42") {
    TempDir dir("fseq");
    Rng rng(42);
    const FeatureSequence s = make_seq(7, 3, rng);
    write_fseq(s, dir / "r.fseq");
    CHECK(bit_equal(read_fseq(dir / "r.fseq"), s));
  }

  TEST_CASE("randomized round trips are bit exact") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      const FeatureSequence s =
          make_seq(1 + static_cast<Eigen::Index>(rng.index(40)),
                   1 + static_cast<Eigen::Index>(rng.index(20)), rng);
      CHECK(bit_equal(decode_fseq(encode_fseq(s)), s));
    }
  }

  TEST_CASE("bad magic") {
    FeatureSequence s;
    s.data = FrameMatrix::Zero(1, 1);
    auto bytes = encode_fseq(s);
    std::memcpy(bytes.data(), "XXXX", 4);
    CHECK(decode_kind(bytes) == FseqError::Kind::kBadMagic);
    CHECK_THROWS_WITH(decode_fseq(bytes), doctest::Contains("bad magic"));
  }

  TEST_CASE("version mismatch") {
    FeatureSequence s;
    s.data = FrameMatrix::Zero(1, 1);
    auto bytes = encode_fseq(s);
    bytes[4] = 2;
    CHECK(decode_kind(bytes) == FseqError::Kind::kVersionMismatch);
  }

  TEST_CASE("truncated payload reports expected size") {
    FeatureSequence s;
    s.data = FrameMatrix::Zero(3, 2);
    auto bytes = encode_fseq(s);
    bytes.resize(20 + 20);
    CHECK(decode_kind(bytes) == FseqError::Kind::kTruncated);
    CHECK_THROWS_WITH(decode_fseq(bytes), doctest::Contains("truncated"));
    CHECK_THROWS_WITH(decode_fseq(bytes), doctest::Contains("24"));
  }

  TEST_CASE("truncated header") {
    std::vector<std::uint8_t> bytes = {'F', 'S', 'E', 'Q', 1};
    CHECK(decode_kind(bytes) == FseqError::Kind::kTruncated);
  }

  TEST_CASE("structural header errors are malformed") {
    FeatureSequence s;
    s.data = FrameMatrix::Zero(2, 2);
    const auto good = encode_fseq(s);

    auto bad_modality = good;
    bad_modality[5] = 3;
    CHECK(decode_kind(bad_modality) == FseqError::Kind::kMalformed);

    auto reserved = good;
    reserved[7] = 1;
    CHECK(decode_kind(reserved) == FseqError::Kind::kMalformed);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(decode_kind(trailing) == FseqError::Kind::kMalformed);

    auto zero_dim = good;
    zero_dim[12] = 0;
    zero_dim.resize(20);
    CHECK(decode_kind(zero_dim) == FseqError::Kind::kMalformed);

    auto inf_payload = good;
    const auto inf = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::infinity());
    for (int i = 0; i < 4; ++i) inf_payload[20 + i] = static_cast<std::uint8_t>(inf >> (8 * i));
    CHECK(decode_kind(inf_payload) == FseqError::Kind::kNonFinite);

    auto bad_fps = good;
    bad_fps[19] = 0xC2;  // -50.0f
    bad_fps[18] = 0x48;
    CHECK(decode_kind(bad_fps) == FseqError::Kind::kMalformed);
  }

  TEST_CASE("missing file is an io error") {
    try {
      read_fseq("/nonexistent/probekit.fseq");
      FAIL("expected an error");
    } catch (const FseqError& e) {
      CHECK(e.kind() == FseqError::Kind::kIo);
    }
  }

  TEST_CASE("modality names") {
    for (Modality m : {Modality::kAudio, Modality::kVisual, Modality::kMultimodal}) {
      CHECK(parse_modality(modality_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_modality("video"), Error);
  }
}

}  // namespace
}  // namespace probekit
