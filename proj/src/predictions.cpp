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

#include "probekit/predictions.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "probekit/error.h"

namespace probekit {

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions " + path.string());
  std::vector<Prediction> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      p.score = j.at("score").get<double>();
      if (j.contains("prob")) p.prob = j.at("prob").get<double>();
      if (j.contains("frame_scores")) p.frame_scores = j.at("frame_scores").get<std::vector<double>>();
      if (!ids.insert(p.id).second) throw Error("duplicate id '" + p.id + "'");
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::vector<Prediction>& predictions,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write predictions " + path.string());
  for (const Prediction& p : predictions) {
    nlohmann::json j;
    j["id"] = p.id;
    j["score"] = p.score;
    if (p.prob) j["prob"] = *p.prob;
    if (!p.frame_scores.empty()) j["frame_scores"] = p.frame_scores;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace probekit
