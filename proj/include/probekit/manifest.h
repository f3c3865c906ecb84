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

// Dataset manifests are JSON Lines, one record per line:
//
//   {"id": "v001", "label": 1, "fps": 25,
//    "features": {"audio": "feats/v001.a.fseq", "visual": "feats/v001.v.fseq"},
//    "segments": [{"start_s": 1.2, "end_s": 2.0}]}
//
// Relative feature paths are resolved against the manifest's directory.

#ifndef PROBEKIT_MANIFEST_H_
#define PROBEKIT_MANIFEST_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "probekit/fseq.h"
#include "probekit/geometry.h"

namespace probekit {

struct VideoRecord {
  std::string id;
  int label = 0;  // 1 fake, 0 real
  double fps = 25.0;
  std::map<std::string, std::filesystem::path> features;
  std::vector<ManipulationSegment> segments;
};

enum class Split { kTrain, kVal, kTest };

struct DatasetManifest {
  std::vector<VideoRecord> records;
  Split split = Split::kTest;
};

// Checks label values, segment ordering, unique ids, and that real videos
// carry no segments.
void validate(const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::filesystem::path& path, Split split = Split::kTest);

// Paths under the manifest's directory are written relative to it.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Reads the stream `key` of a record and brings it to the record frame rate:
// a stream at twice the record fps (e.g. 50 Hz speech features for 25 fps
// video) is pair-downsampled; any other rate mismatch is an error.
FeatureSequence load_stream(const VideoRecord& record, const std::string& key);

}  // namespace probekit

#endif  // PROBEKIT_MANIFEST_H_
