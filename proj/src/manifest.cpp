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

#include "probekit/manifest.h"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "probekit/error.h"

namespace probekit {
namespace {

using nlohmann::json;

VideoRecord parse_record(const json& j, const std::filesystem::path& base) {
  VideoRecord record;
  record.id = j.at("id").get<std::string>();
  record.label = j.at("label").get<int>();
  record.fps = j.value("fps", 25.0);
  if (j.contains("features")) {
    for (const auto& [key, value] : j.at("features").items()) {
      std::filesystem::path p = value.get<std::string>();
      record.features[key] = p.is_relative() ? base / p : p;
    }
  }
  if (j.contains("segments")) {
    for (const json& s : j.at("segments")) {
      record.segments.push_back({s.at("start_s").get<double>(), s.at("end_s").get<double>()});
    }
  }
  return record;
}

std::string portable_path(const std::filesystem::path& p, const std::filesystem::path& base) {
  const std::filesystem::path abs_p = std::filesystem::absolute(p).lexically_normal();
  const std::filesystem::path abs_base =
      std::filesystem::absolute(base.empty() ? std::filesystem::path(".") : base).lexically_normal();
  const std::filesystem::path rel = abs_p.lexically_relative(abs_base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs_p.generic_string();
}

}  // namespace

void validate(const DatasetManifest& manifest) {
  std::set<std::string> ids;
  for (const VideoRecord& r : manifest.records) {
    if (!ids.insert(r.id).second) throw Error("duplicate id '" + r.id + "' in manifest");
    if (r.label != 0 && r.label != 1) throw Error("record '" + r.id + "': label must be 0 or 1");
    if (!(r.fps > 0.0)) throw Error("record '" + r.id + "': fps must be positive");
    if (r.label == 0 && !r.segments.empty()) {
      throw Error("record '" + r.id + "': real videos cannot have manipulation segments");
    }
    for (const ManipulationSegment& s : r.segments) {
      if (!(s.start_s >= 0.0 && s.start_s < s.end_s)) {
        throw Error("record '" + r.id + "': segment needs 0 <= start_s < end_s");
      }
    }
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  DatasetManifest manifest;
  manifest.split = split;
  const std::filesystem::path base = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      manifest.records.push_back(parse_record(json::parse(line), base));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(manifest);
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  validate(manifest);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  for (const VideoRecord& r : manifest.records) {
    json j;
    j["id"] = r.id;
    j["label"] = r.label;
    j["fps"] = r.fps;
    json features = json::object();
    for (const auto& [key, p] : r.features) features[key] = portable_path(p, base);
    j["features"] = features;
    json segments = json::array();
    for (const ManipulationSegment& s : r.segments) {
      segments.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
    }
    j["segments"] = segments;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

FeatureSequence load_stream(const VideoRecord& record, const std::string& key) {
  const auto it = record.features.find(key);
  if (it == record.features.end()) {
    throw Error("record '" + record.id + "' has no '" + key + "' stream");
  }
  FeatureSequence seq = read_fseq(it->second);
  const double ratio = static_cast<double>(seq.fps) / record.fps;
  if (std::abs(ratio - 1.0) < 1e-3) return seq;
  if (std::abs(ratio - 2.0) < 1e-3) return pair_downsample(seq);
  throw Error("record '" + record.id + "': stream '" + key + "' at " + std::to_string(seq.fps) +
              " fps cannot be matched to " + std::to_string(record.fps) + " fps");
}

}  // namespace probekit
