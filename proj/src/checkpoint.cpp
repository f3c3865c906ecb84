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

#include "probekit/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "probekit/error.h"

namespace probekit {
namespace {

constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(source_ + ": truncated checkpoint");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

const Eigen::MatrixXd& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, value] : tensors) {
    if (n == name) return value;
  }
  throw Error("checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out = {'P', 'K', 'P', 'T', kVersion, 0, 0, 0};
  const std::string meta = ckpt.meta.dump();
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, value] : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(value.rows()));
    put_u32(out, static_cast<std::uint32_t>(value.cols()));
  }
  for (const auto& [name, value] : ckpt.tensors) {
    if (!value.allFinite()) throw Error("non-finite value in tensor '" + name + "'");
    for (Eigen::Index i = 0; i < value.rows(); ++i) {
      for (Eigen::Index j = 0; j < value.cols(); ++j) {
        put_u64(out, std::bit_cast<std::uint64_t>(value(i, j)));
      }
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                        std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());
  if (r.text(4) != "PKPT") throw Error(path.string() + ": bad magic");
  r.need(4);
  if (bytes[4] != kVersion) throw Error(path.string() + ": version mismatch");
  r.skip(4);

  Checkpoint ckpt;
  const std::uint32_t meta_len = r.u32();
  try {
    ckpt.meta = nlohmann::json::parse(r.text(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": bad metadata: " + e.what());
  }
  const std::uint32_t count = r.u32();
  std::vector<std::pair<std::string, std::pair<std::uint32_t, std::uint32_t>>> table;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = r.text(r.u32());
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    table.push_back({std::move(name), {rows, cols}});
  }
  for (const auto& [name, shape] : table) {
    r.need(static_cast<std::size_t>(shape.first) * shape.second * 8);
    Eigen::MatrixXd value(shape.first, shape.second);
    for (std::uint32_t i = 0; i < shape.first; ++i) {
      for (std::uint32_t j = 0; j < shape.second; ++j) value(i, j) = std::bit_cast<double>(r.u64());
    }
    ckpt.tensors.emplace_back(name, std::move(value));
  }
  if (r.pos() != bytes.size()) throw Error(path.string() + ": trailing bytes in checkpoint");
  return ckpt;
}

Checkpoint to_checkpoint(const ParamSet& params, nlohmann::json meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const Tensor& t : params) ckpt.tensors.emplace_back(t.name, t.value);
  return ckpt;
}

void load_params(ParamSet& params, const Checkpoint& ckpt) {
  for (Tensor& t : params) {
    const Eigen::MatrixXd& value = ckpt.tensor(t.name);
    if (value.rows() != t.value.rows() || value.cols() != t.value.cols()) {
      throw Error("checkpoint tensor '" + t.name + "' has shape " +
                  std::to_string(value.rows()) + "x" + std::to_string(value.cols()) +
                  ", expected " + std::to_string(t.value.rows()) + "x" +
                  std::to_string(t.value.cols()));
    }
    t.value = value;
  }
}

void expect_kind(const Checkpoint& ckpt, const std::string& expected) {
  const std::string kind = ckpt.meta.value("kind", std::string());
  if (kind != expected) {
    throw Error("checkpoint holds a '" + kind + "' model, expected '" + expected + "'");
  }
}

}  // namespace probekit
