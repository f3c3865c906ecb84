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

#include "probekit/fseq.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "probekit/error.h"

namespace probekit {
namespace {

using Kind = FseqError::Kind;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return value;
}

}  // namespace

std::string_view modality_name(Modality modality) {
  switch (modality) {
    case Modality::kAudio:
      return "audio";
    case Modality::kVisual:
      return "visual";
    case Modality::kMultimodal:
      return "multimodal";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "audio") return Modality::kAudio;
  if (name == "visual") return Modality::kVisual;
  if (name == "multimodal") return Modality::kMultimodal;
  throw Error("unknown modality '" + std::string(name) + "'");
}

bool bit_equal(const FeatureSequence& a, const FeatureSequence& b) {
  if (a.modality != b.modality) return false;
  if (std::bit_cast<std::uint32_t>(a.fps) != std::bit_cast<std::uint32_t>(b.fps)) return false;
  if (a.frames() != b.frames() || a.dim() != b.dim()) return false;
  return std::memcmp(a.data.data(), b.data.data(), sizeof(float) * a.data.size()) == 0;
}

void validate(const FeatureSequence& seq) {
  if (seq.frames() < 1 || seq.dim() < 1) {
    throw FseqError(Kind::kMalformed, "feature sequence must have T >= 1 and D >= 1");
  }
  if (!(std::isfinite(seq.fps) && seq.fps > 0.0f)) {
    throw FseqError(Kind::kMalformed, "fps must be positive and finite");
  }
  if (!seq.data.allFinite()) {
    throw FseqError(Kind::kNonFinite, "non-finite entry in feature payload");
  }
}

std::vector<std::uint8_t> encode_fseq(const FeatureSequence& seq) {
  validate(seq);
  if (seq.frames() > UINT32_MAX || seq.dim() > UINT32_MAX) {
    throw FseqError(Kind::kMalformed, "feature sequence too large for FSEQ");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFseqHeaderBytes + 4 * seq.data.size());
  for (char c : {'F', 'S', 'E', 'Q'}) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kFseqVersion);
  out.push_back(static_cast<std::uint8_t>(seq.modality));
  out.push_back(0);
  out.push_back(0);
  put_u32(out, static_cast<std::uint32_t>(seq.frames()));
  put_u32(out, static_cast<std::uint32_t>(seq.dim()));
  put_u32(out, std::bit_cast<std::uint32_t>(seq.fps));
  const float* values = seq.data.data();
  for (Eigen::Index i = 0; i < seq.data.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(values[i]));
  }
  return out;
}

FeatureSequence decode_fseq(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFseqHeaderBytes) {
    throw FseqError(Kind::kTruncated, "truncated header: " + std::to_string(bytes.size()) +
                                          " bytes, need " + std::to_string(kFseqHeaderBytes));
  }
  if (std::memcmp(bytes.data(), "FSEQ", 4) != 0) {
    throw FseqError(Kind::kBadMagic, "bad magic");
  }
  if (bytes[4] != kFseqVersion) {
    throw FseqError(Kind::kVersionMismatch,
                    "version mismatch: file has " + std::to_string(bytes[4]) + ", expected " +
                        std::to_string(kFseqVersion));
  }
  if (bytes[5] > 2) {
    throw FseqError(Kind::kMalformed, "unknown modality code " + std::to_string(bytes[5]));
  }
  if (bytes[6] != 0 || bytes[7] != 0) {
    throw FseqError(Kind::kMalformed, "reserved header bytes must be zero");
  }
  const std::uint64_t rows = get_u32(bytes, 8);
  const std::uint64_t cols = get_u32(bytes, 12);
  const std::uint64_t expected = rows * cols * 4;
  const std::uint64_t payload = bytes.size() - kFseqHeaderBytes;
  if (payload < expected) {
    throw FseqError(Kind::kTruncated, "truncated payload: " + std::to_string(payload) +
                                          " bytes, expected " + std::to_string(expected));
  }
  if (payload > expected) {
    throw FseqError(Kind::kMalformed, "trailing bytes after payload: " +
                                          std::to_string(payload - expected));
  }

  FeatureSequence seq;
  seq.modality = static_cast<Modality>(bytes[5]);
  seq.fps = std::bit_cast<float>(get_u32(bytes, 16));
  seq.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  float* values = seq.data.data();
  for (std::uint64_t i = 0; i < rows * cols; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kFseqHeaderBytes + 4 * i));
  }
  validate(seq);
  return seq;
}

void write_fseq(const FeatureSequence& seq, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_fseq(seq);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FseqError(Kind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FseqError(Kind::kIo, "write failed: " + path.string());
}

FeatureSequence read_fseq(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FseqError(Kind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_fseq(bytes);
  } catch (const FseqError& e) {
    throw FseqError(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace probekit
