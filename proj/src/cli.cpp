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

#include "probekit/cli.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "probekit/checkpoint.h"
#include "probekit/error.h"
#include "probekit/explanations.h"
#include "probekit/log.h"
#include "probekit/ntp.h"
#include "probekit/parallel.h"
#include "probekit/probe.h"
#include "probekit/sync.h"
#include "probekit/synthetic.h"
#include "probekit/zero_shot.h"

namespace probekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_num(double x) { return fmt::format("{:.6f}", x); }

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// Scores every record with `score_one`, in manifest order. Records that fail
// are reported on stderr and left out.
std::vector<Prediction> score_records(const DatasetManifest& manifest, int jobs,
                                      const std::function<double(const VideoRecord&)>& score_one,
                                      std::ostream& err) {
  const std::size_t n = manifest.records.size();
  std::vector<std::optional<double>> scores(n);
  std::vector<std::string> errors(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      scores[i] = score_one(manifest.records[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i]) {
      out.push_back({manifest.records[i].id, *scores[i], std::nullopt, {}});
    } else {
      err << "skipping '" << manifest.records[i].id << "': " << errors[i] << '\n';
    }
  }
  if (out.empty() && n > 0) throw Error("no record could be scored");
  return out;
}

struct Common {
  std::string manifest;
  std::string val_manifest;
  std::string modality = "visual";
  std::string features;
  std::string checkpoint;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;

  std::string key() const {
    if (!features.empty()) return features;
    return std::string(modality_name(parse_modality(modality)));
  }
};

void add_manifest(CLI::App* sub, Common& c, bool required = true) {
  auto* opt = sub->add_option("--manifest", c.manifest, "Dataset manifest (JSON Lines)")
                  ->check(CLI::ExistingFile);
  if (required) opt->required();
}

void add_key(CLI::App* sub, Common& c) {
  sub->add_option("--modality", c.modality, "Stream modality")
      ->check(CLI::IsMember({"audio", "visual", "multimodal"}))
      ->capture_default_str();
  sub->add_option("--features", c.features, "Feature key of multi-stream records");
}

void add_checkpoint(CLI::App* sub, Common& c) {
  sub->add_option("--checkpoint", c.checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
}

void add_out(CLI::App* sub, Common& c, const std::string& what) {
  sub->add_option("--out", c.out, what)->required();
}

void add_jobs(CLI::App* sub, Common& c) {
  sub->add_option("--jobs", c.jobs, "Scoring threads")->check(CLI::PositiveNumber);
}

void add_training(CLI::App* sub, Common& c, int& epochs, double& lr, int& patience) {
  sub->add_option("--val-manifest", c.val_manifest, "Validation manifest")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--epochs", epochs, "Maximum epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lr", lr, "Initial learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--patience", patience, "Early-stopping patience")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void print_history(const TrainHistory& h, std::ostream& out) {
  out << "epochs " << h.val_loss.size() << ", best epoch " << h.best_epoch << ", best val loss "
      << fmt_num(h.val_loss.at(static_cast<std::size_t>(h.best_epoch))) << '\n';
}

// --- synth ---------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  json base = spec_path.empty() ? json::object() : read_json_file(spec_path);
  if (!base.is_object()) throw Error("synth spec must be a JSON object");
  json splits = {{"train", json::object()}, {"val", json::object()}, {"test", json::object()}};
  if (base.contains("splits")) {
    splits = base["splits"];
    base.erase("splits");
    if (!splits.is_object() || splits.empty()) throw Error("\"splits\" must be a non-empty object");
  }
  if (seed) base["seed"] = *seed;
  synth_spec_from_json(base);  // reject bad base specs before writing anything

  for (const auto& [name, overrides] : splits.items()) {
    if (!overrides.is_object()) throw Error("split '" + name + "' must map to an object");
    json merged = base;
    for (const auto& [k, v] : overrides.items()) {
      if (k == "seed" || k == "splits") throw Error("split '" + name + "' may not override " + k);
      merged[k] = v;
    }
    const SynthSpec spec = synth_spec_from_json(merged);
    const DatasetManifest m = gen_dataset(spec, name, out_dir);
    out << name << ": " << m.records.size() << " videos -> "
        << (fs::path(out_dir) / (name + ".jsonl")).string() << '\n';
  }
  json saved = base;
  saved["splits"] = splits;
  write_text(fs::path(out_dir) / "spec.json", saved.dump(2) + "\n");
  return kExitOk;
}

// --- eval, correlate, fuse -------------------------------------------------

std::map<std::string, const Prediction*> index_predictions(const std::vector<Prediction>& preds) {
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : preds) by_id[p.id] = &p;
  return by_id;
}

// Aligns several prediction files on the ids of the first one.
std::vector<std::vector<const Prediction*>> align_runs(
    const std::vector<std::vector<Prediction>>& runs, const std::vector<std::string>& names) {
  std::vector<std::map<std::string, const Prediction*>> maps;
  for (const auto& r : runs) maps.push_back(index_predictions(r));
  std::vector<std::vector<const Prediction*>> out(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k].size() != runs[0].size()) {
      throw Error("id mismatch: " + names[k] + " has " + std::to_string(runs[k].size()) +
                  " predictions, " + names[0] + " has " + std::to_string(runs[0].size()));
    }
  }
  for (const Prediction& p : runs[0]) {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto it = maps[k].find(p.id);
      if (it == maps[k].end()) throw Error("id mismatch: '" + p.id + "' missing from " + names[k]);
      out[k].push_back(it->second);
    }
  }
  return out;
}

std::vector<std::string> run_names(const std::vector<std::string>& paths,
                                   const std::vector<std::string>& names) {
  if (!names.empty() && names.size() != paths.size()) {
    throw Error("--name must be given once per --predictions file");
  }
  std::vector<std::string> out = names;
  if (out.empty()) {
    for (const auto& p : paths) out.push_back(fs::path(p).stem().string());
  }
  return out;
}

int cmd_eval(const Common& c, const std::vector<std::string>& pred_paths,
             const std::vector<std::string>& names_in, std::ostream& out) {
  const DatasetManifest manifest = read_manifest(c.manifest);
  const std::vector<std::string> names = run_names(pred_paths, names_in);
  std::vector<EvalRow> rows;
  for (std::size_t k = 0; k < pred_paths.size(); ++k) {
    rows.push_back(eval_report(read_predictions(pred_paths[k]), manifest, names[k]));
  }
  out << eval_csv(rows);
  if (!c.out.empty()) {
    write_text(c.out + ".csv", eval_csv(rows));
    write_text(c.out + ".json", eval_json(rows));
  }
  return kExitOk;
}

int cmd_correlate(const Common& c, const std::vector<std::string>& pred_paths,
                  const std::vector<std::string>& names_in, const std::string& field,
                  std::ostream& out) {
  if (pred_paths.size() < 2) throw Error("correlate needs at least two --predictions files");
  const std::vector<std::string> names = run_names(pred_paths, names_in);
  std::vector<std::vector<Prediction>> runs;
  for (const auto& p : pred_paths) runs.push_back(read_predictions(p));
  const auto aligned = align_runs(runs, names);
  std::vector<std::vector<double>> values(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (const Prediction* p : aligned[k]) {
      if (field == "prob") {
        if (!p->prob) throw Error(names[k] + ": prediction '" + p->id + "' has no prob");
        values[k].push_back(*p->prob);
      } else {
        values[k].push_back(p->score);
      }
    }
  }
  std::ostringstream csv;
  csv << "model";
  for (const auto& n : names) csv << ',' << n;
  csv << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) {
    csv << names[i];
    for (std::size_t j = 0; j < runs.size(); ++j) {
      csv << ',' << fmt_num(pearson(values[i], values[j]));
    }
    csv << '\n';
  }
  out << csv.str();
  if (!c.out.empty()) write_text(c.out, csv.str());
  return kExitOk;
}

int cmd_fuse(const Common& c, const std::vector<std::string>& pred_paths, std::ostream& out) {
  if (pred_paths.size() < 2) throw Error("fuse needs at least two --predictions files");
  const std::vector<std::string> names = run_names(pred_paths, {});
  std::vector<std::vector<Prediction>> runs;
  for (const auto& p : pred_paths) runs.push_back(read_predictions(p));
  const auto aligned = align_runs(runs, names);
  std::vector<std::vector<double>> probs(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (const Prediction* p : aligned[k]) {
      if (!p->prob) {
        throw Error(names[k] + ": prediction '" + p->id +
                    "' has no prob; late fusion averages probabilities");
      }
      probs[k].push_back(*p->prob);
    }
  }
  const std::vector<double> fused = late_fuse(probs);
  std::vector<Prediction> result;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    result.push_back({aligned[0][i]->id, fused[i], fused[i], {}});
  }
  write_predictions(result, c.out);
  out << "fused " << result.size() << " predictions from " << runs.size() << " runs -> " << c.out
      << '\n';
  return kExitOk;
}

// --- probe ---------------------------------------------------------------

int cmd_train_probe(const Common& c, ProbeTrainConfig cfg, std::ostream& out) {
  cfg.seed = c.seed;
  const DatasetManifest train = read_manifest(c.manifest, Split::kTrain);
  const DatasetManifest val = read_manifest(c.val_manifest, Split::kVal);
  TrainHistory history;
  const LinearProbe probe = train_probe(train, val, c.key(), cfg, &history);
  ensure_parent(c.out);
  write_checkpoint(probe.to_checkpoint(), c.out);
  print_history(history, out);
  return kExitOk;
}

int cmd_predict(const Common& c, std::ostream& out, std::ostream& err) {
  const LinearProbe probe = LinearProbe::from_checkpoint(read_checkpoint(c.checkpoint));
  const DatasetManifest manifest = read_manifest(c.manifest);
  const PredictResult result = predict(probe, manifest, c.key(), c.jobs);
  for (const RecordFailure& f : result.failures) {
    err << "skipping '" << f.id << "': " << f.message << '\n';
  }
  if (result.reports.empty() && !manifest.records.empty()) {
    throw Error("no record could be scored");
  }
  std::vector<Prediction> preds;
  for (const ScoreReport& r : result.reports) {
    preds.push_back({r.video_id, r.video_score, r.video_prob,
                     std::vector<double>(r.frame_scores.begin(), r.frame_scores.end())});
  }
  ensure_parent(c.out);
  write_predictions(preds, c.out);
  out << "scored " << preds.size() << " of " << manifest.records.size() << " videos -> " << c.out
      << '\n';
  return kExitOk;
}

json point_json(const RelativePoint& p) { return {{"x", p.x}, {"y", p.y}}; }

std::vector<Point2> read_clicks(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw Error("clicks file must be a JSON array of {\"x\", \"y\"}");
  std::vector<Point2> pts;
  for (const json& e : j) pts.push_back({e.at("x").get<double>(), e.at("y").get<double>()});
  return pts;
}

int cmd_explain(const Common& c, const std::string& patches, const std::string& saliency,
                const std::string& clicks, std::ostream& out) {
  const int modes = int(!c.manifest.empty()) + int(!patches.empty()) + int(!saliency.empty());
  if (modes != 1) throw Error("explain takes exactly one of --manifest, --patches, --saliency");
  ensure_parent(c.out);
  std::ofstream f(c.out, std::ios::trunc);
  if (!f) throw Error("cannot write " + c.out);

  std::vector<Point2> peaks;
  if (!saliency.empty()) {
    for (const SaliencyMap& m : read_saliency(saliency)) {
      const RelativePoint p = saliency_peak(m);
      peaks.push_back({p.x, p.y});
      f << json{{"frame", m.frame_index}, {"peak", point_json(p)}}.dump() << '\n';
    }
  } else {
    if (c.checkpoint.empty()) throw Error("--checkpoint is required with --manifest or --patches");
    const LinearProbe probe = LinearProbe::from_checkpoint(read_checkpoint(c.checkpoint));
    if (!patches.empty()) {
      const PatchFeatureSequence pseq = read_patch_features(patches);
      const std::vector<Eigen::MatrixXd> maps = patch_cam(probe, pseq);
      for (std::size_t t = 0; t < maps.size(); ++t) {
        const SaliencyMap sm{static_cast<Eigen::Index>(t), maps[t].array() - maps[t].minCoeff()};
        const RelativePoint p = saliency_peak(sm);
        peaks.push_back({p.x, p.y});
        json cells = json::array();
        for (Eigen::Index i = 0; i < maps[t].rows(); ++i) {
          for (Eigen::Index j = 0; j < maps[t].cols(); ++j) cells.push_back(maps[t](i, j));
        }
        f << json{{"frame", t},
                  {"h", pseq.rows},
                  {"w", pseq.cols},
                  {"map", cells},
                  {"peak", point_json(p)}}
                 .dump()
          << '\n';
      }
    } else {
      const DatasetManifest manifest = read_manifest(c.manifest);
      for (const VideoRecord& r : manifest.records) {
        const FeatureSequence seq = load_stream(r, c.key());
        json frames = json::array();
        for (const FrameExplanation& e : temporal_explanation(probe, seq)) {
          frames.push_back({{"time_s", e.time_s}, {"score", e.score}, {"prob", e.prob}});
        }
        f << json{{"id", r.id}, {"fps", seq.fps}, {"frames", frames}}.dump() << '\n';
      }
    }
  }
  if (!clicks.empty()) {
    if (peaks.empty()) throw Error("--clicks needs --patches or --saliency");
    const std::vector<Point2> truth = read_clicks(clicks);
    out << "alignment MAE " << fmt_num(mae_alignment(peaks, truth)) << " over " << peaks.size()
        << " frames\n";
  }
  out << "wrote " << c.out << '\n';
  return kExitOk;
}

// --- next-token prediction -------------------------------------------------

int cmd_train_ntp(const Common& c, NtpTrainConfig cfg, std::ostream& out) {
  cfg.seed = c.seed;
  const DatasetManifest train = read_manifest(c.manifest, Split::kTrain);
  const DatasetManifest val = read_manifest(c.val_manifest, Split::kVal);
  TrainHistory history;
  const TransformerPredictor model = ntp_train(train, val, c.key(), cfg, &history);
  ensure_parent(c.out);
  write_checkpoint(model.to_checkpoint(), c.out);
  print_history(history, out);
  return kExitOk;
}

int cmd_score_ntp(const Common& c, std::ostream& out, std::ostream& err) {
  const TransformerPredictor model =
      TransformerPredictor::from_checkpoint(read_checkpoint(c.checkpoint));
  const DatasetManifest manifest = read_manifest(c.manifest);
  const std::string key = c.key();
  const auto preds = score_records(
      manifest, c.jobs,
      [&](const VideoRecord& r) { return ntp_score(model, load_stream(r, key).as_double()); },
      err);
  ensure_parent(c.out);
  write_predictions(preds, c.out);
  out << "scored " << preds.size() << " of " << manifest.records.size() << " videos -> " << c.out
      << '\n';
  return kExitOk;
}

// --- synchronization ---------------------------------------------------------

int cmd_train_sync(const Common& c, SyncConfig cfg, std::ostream& out) {
  cfg.seed = c.seed;
  const DatasetManifest train = read_manifest(c.manifest, Split::kTrain);
  const DatasetManifest val = read_manifest(c.val_manifest, Split::kVal);
  TrainHistory history;
  const AlignmentNet net = sync_train(train, val, cfg, &history);
  ensure_parent(c.out);
  write_checkpoint(net.to_checkpoint(), c.out);
  print_history(history, out);
  return kExitOk;
}

int cmd_score_sync(const Common& c, std::ostream& out, std::ostream& err) {
  const AlignmentNet net = AlignmentNet::from_checkpoint(read_checkpoint(c.checkpoint));
  const DatasetManifest manifest = read_manifest(c.manifest);
  const auto preds = score_records(
      manifest, c.jobs,
      [&](const VideoRecord& r) {
        const SyncPair p = load_sync_pair(r);
        return sync_score(net, p.audio, p.visual);
      },
      err);
  ensure_parent(c.out);
  write_predictions(preds, c.out);
  out << "scored " << preds.size() << " of " << manifest.records.size() << " videos -> " << c.out
      << '\n';
  return kExitOk;
}

int cmd_zero_shot(const Common& c, const std::vector<std::string>& pool_names,
                  std::vector<int> deltas, std::size_t min_overlap, bool layer_norm,
                  std::ostream& out, std::ostream& err) {
  std::vector<PoolKind> pools;
  for (const auto& n : pool_names) pools.push_back(parse_pool(n));
  if (pools.empty()) pools.assign(kAllPools.begin(), kAllPools.end());
  if (deltas.empty()) deltas = {0, 15};
  for (int d : deltas) {
    if (d < 0) throw Error("--delta must be >= 0");
  }
  const DatasetManifest manifest = read_manifest(c.manifest);
  const std::size_t n = manifest.records.size();

  std::vector<std::optional<std::vector<std::vector<double>>>> grids(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const VideoRecord& r = manifest.records[i];
    try {
      const auto [a, v] = trim_align(load_stream(r, "audio"), load_stream(r, "visual"));
      grids[i] = zero_shot_grid(a.as_double(), v.as_double(), deltas, min_overlap, layer_norm);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  // grid rows follow kAllPools; pick the requested ones.
  std::vector<std::size_t> rows;
  for (PoolKind p : pools) {
    rows.push_back(static_cast<std::size_t>(
        std::find(kAllPools.begin(), kAllPools.end(), p) - kAllPools.begin()));
  }
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ofstream grid_file(dir / "grid.jsonl", std::ios::trunc);
  if (!grid_file) throw Error("cannot write " + (dir / "grid.jsonl").string());
  std::vector<std::vector<LabeledScores>> cells(pools.size(),
                                                std::vector<LabeledScores>(deltas.size()));
  std::vector<Prediction> single;
  for (std::size_t i = 0; i < n; ++i) {
    const VideoRecord& r = manifest.records[i];
    if (!grids[i]) {
      err << "skipping '" << r.id << "': " << errors[i] << '\n';
      continue;
    }
    json scores = json::object();
    for (std::size_t p = 0; p < pools.size(); ++p) {
      json by_delta = json::object();
      for (std::size_t d = 0; d < deltas.size(); ++d) {
        const double s = (*grids[i])[rows[p]][d];
        by_delta[std::to_string(deltas[d])] = s;
        cells[p][d].scores.push_back(s);
        cells[p][d].labels.push_back(r.label);
      }
      scores[std::string(pool_name(pools[p]))] = by_delta;
    }
    grid_file << json{{"id", r.id}, {"label", r.label}, {"scores", scores}}.dump() << '\n';
    if (pools.size() == 1 && deltas.size() == 1) {
      single.push_back({r.id, (*grids[i])[rows[0]][0], std::nullopt, {}});
    }
  }
  if (cells[0][0].scores.empty() && n > 0) throw Error("no record could be scored");
  if (pools.size() == 1 && deltas.size() == 1) write_predictions(single, dir / "predictions.jsonl");

  const auto& labels = cells[0][0].labels;
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  if (!both) {
    out << "wrote " << (dir / "grid.jsonl").string() << " (single-class manifest, no AUC table)\n";
    return kExitOk;
  }
  std::ostringstream csv;
  json table = json::array();
  csv << "pool";
  for (int d : deltas) csv << ",delta_" << d;
  csv << '\n';
  for (std::size_t p = 0; p < pools.size(); ++p) {
    csv << pool_name(pools[p]);
    json row = {{"pool", pool_name(pools[p])}};
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const double auc = roc_auc(cells[p][d]);
      csv << ',' << fmt_num(auc);
      row["delta_" + std::to_string(deltas[d])] = auc;
    }
    csv << '\n';
    table.push_back(row);
  }
  write_text(dir / "auc.csv", csv.str());
  write_text(dir / "auc.json", table.dump(2) + "\n");
  out << csv.str();
  return kExitOk;
}

// --- validate ----------------------------------------------------------------

void validate_fseq_file(const fs::path& path) {
  const FeatureSequence seq = read_fseq(path);
  validate(seq);
  const fs::path side = path.string() + ".json";
  if (fs::exists(side)) {
    const json j = read_json_file(side);
    const auto h = j.at("h").get<Eigen::Index>();
    const auto w = j.at("w").get<Eigen::Index>();
    if (h < 1 || w < 1 || seq.dim() % (h * w) != 0) {
      throw Error(path.string() + ": sidecar grid " + std::to_string(h) + "x" +
                  std::to_string(w) + " does not divide D=" + std::to_string(seq.dim()));
    }
  }
}

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out) {
  for (const auto& p : paths) {
    if (fs::path(p).extension() == ".jsonl") {
      const DatasetManifest m = read_manifest(p);
      for (const VideoRecord& r : m.records) {
        for (const auto& [key, file] : r.features) {
          try {
            validate_fseq_file(file);
          } catch (const Error& e) {
            throw Error("record '" + r.id + "' stream '" + key + "': " + e.what());
          }
        }
      }
      out << "ok " << p << " (" << m.records.size() << " records)\n";
    } else {
      validate_fseq_file(p);
      out << "ok " << p << '\n';
    }
  }
  return kExitOk;
}

std::size_t count_fake_frames(const std::vector<int>& labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

}  // namespace

EvalRow eval_report(const std::vector<Prediction>& predictions, const DatasetManifest& manifest,
                    std::string run_name) {
  const auto by_id = index_predictions(predictions);
  if (by_id.size() != predictions.size()) throw Error("duplicate prediction ids");
  std::set<std::string> manifest_ids;
  for (const VideoRecord& r : manifest.records) manifest_ids.insert(r.id);
  for (const Prediction& p : predictions) {
    if (!manifest_ids.contains(p.id)) {
      throw Error("id mismatch: prediction '" + p.id + "' is not in the manifest");
    }
  }
  LabeledScores ls;
  std::vector<FrameLevel> frames;
  bool have_segments = false;
  bool have_frames = true;
  for (const VideoRecord& r : manifest.records) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw Error("id mismatch: no prediction for '" + r.id + "'");
    const Prediction& p = *it->second;
    ls.scores.push_back(p.score);
    ls.labels.push_back(r.label);
    if (r.label == 1 && !r.segments.empty()) {
      have_segments = true;
      if (p.frame_scores.empty()) {
        have_frames = false;
        continue;
      }
      FrameLevel fl{p.frame_scores, frame_labels(r.segments, p.frame_scores.size(), r.fps)};
      if (count_fake_frames(fl.frame_labels) == 0) {
        spdlog::warn("eval: '{}' has segments but no fake frame midpoints; left out", r.id);
        continue;
      }
      frames.push_back(std::move(fl));
    }
  }
  EvalRow row;
  row.run = std::move(run_name);
  row.videos = ls.scores.size();
  row.auc = roc_auc(ls);
  row.ap = average_precision(ls);
  if (have_segments && have_frames && !frames.empty()) row.localization = localization_auc(frames);
  return row;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream s;
  s << "run,videos,auc,ap,loc_auc,loc_videos\n";
  for (const EvalRow& r : rows) {
    s << r.run << ',' << r.videos << ',' << fmt_num(r.auc) << ',' << fmt_num(r.ap) << ',';
    if (r.localization) {
      s << fmt_num(r.localization->auc) << ',' << r.localization->videos_used;
    } else {
      s << ',';
    }
    s << '\n';
  }
  return s.str();
}

std::string eval_json(const std::vector<EvalRow>& rows) {
  json arr = json::array();
  for (const EvalRow& r : rows) {
    json j = {{"run", r.run}, {"videos", r.videos}, {"auc", r.auc}, {"ap", r.ap}};
    if (r.localization) {
      j["localization_auc"] = r.localization->auc;
      j["localization_videos"] = r.localization->videos_used;
      j["localization_skipped_all_fake"] = r.localization->videos_skipped_all_fake;
    } else {
      j["localization_auc"] = nullptr;
    }
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  init_logging();
  CLI::App app{"Deepfake detection probes over frozen per-frame embeddings"};
  app.name(args.empty() ? "probekit" : fs::path(args[0]).filename().string());
  app.require_subcommand(1, 1);

  Common c;
  std::string spec_path;
  std::optional<std::uint64_t> synth_seed;
  std::vector<std::string> pred_paths;
  std::vector<std::string> names;
  std::string field = "score";
  std::string patches, saliency, clicks;
  std::vector<std::string> pools;
  std::vector<int> deltas;
  std::size_t min_overlap = 1;
  bool layer_norm = false;
  std::vector<std::string> validate_paths;
  ProbeTrainConfig probe_cfg;
  NtpTrainConfig ntp_cfg;
  SyncConfig sync_cfg;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature dataset");
  synth->add_option("--spec", spec_path, "Generator spec (JSON)")->check(CLI::ExistingFile);
  add_out(synth, c, "Output directory");
  synth->add_option("--seed", synth_seed, "Override the spec seed");

  auto* tprobe = app.add_subcommand("train-probe", "Train a linear probe");
  add_manifest(tprobe, c);
  add_key(tprobe, c);
  add_out(tprobe, c, "Checkpoint path");
  add_training(tprobe, c, probe_cfg.max_epochs, probe_cfg.lr, probe_cfg.early_stop_patience);
  tprobe->add_option("--batch", probe_cfg.batch_videos, "Videos per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* pred = app.add_subcommand("predict", "Score videos with a linear probe");
  add_manifest(pred, c);
  add_key(pred, c);
  add_checkpoint(pred, c);
  add_out(pred, c, "Predictions (JSON Lines)");
  add_jobs(pred, c);

  auto* expl = app.add_subcommand("explain", "Temporal and spatial explanations");
  add_manifest(expl, c, false);
  add_key(expl, c);
  expl->add_option("--checkpoint", c.checkpoint, "Probe checkpoint")->check(CLI::ExistingFile);
  expl->add_option("--patches", patches, "Patch features (FSEQ with grid sidecar)")
      ->check(CLI::ExistingFile);
  expl->add_option("--saliency", saliency, "Saliency maps (FSEQ with grid sidecar)")
      ->check(CLI::ExistingFile);
  expl->add_option("--clicks", clicks, "Per-frame click annotations (JSON)")
      ->check(CLI::ExistingFile);
  add_out(expl, c, "Explanations (JSON Lines)");

  auto* tntp = app.add_subcommand("train-ntp", "Train a next-token predictor on real videos");
  add_manifest(tntp, c);
  add_key(tntp, c);
  add_out(tntp, c, "Checkpoint path");
  add_training(tntp, c, ntp_cfg.max_epochs, ntp_cfg.lr0, ntp_cfg.early_stop_patience);
  tntp->add_option("--batch", ntp_cfg.batch_videos, "Videos per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tntp->add_option("--d-model", ntp_cfg.arch.d_model, "Model width")->capture_default_str();
  tntp->add_option("--layers", ntp_cfg.arch.layers, "Transformer blocks")->capture_default_str();
  tntp->add_option("--heads", ntp_cfg.arch.heads, "Attention heads")->capture_default_str();
  tntp->add_option("--ff-dim", ntp_cfg.arch.ff_dim, "Feed-forward width")->capture_default_str();
  tntp->add_option("--max-len", ntp_cfg.arch.max_len, "Maximum frames")->capture_default_str();
  tntp->add_flag("--standardize", ntp_cfg.standardize, "Z-score inputs with training statistics");

  auto* sntp = app.add_subcommand("score-ntp", "Score videos by next-token prediction error");
  add_manifest(sntp, c);
  add_key(sntp, c);
  add_checkpoint(sntp, c);
  add_out(sntp, c, "Predictions (JSON Lines)");
  add_jobs(sntp, c);

  auto* tsync = app.add_subcommand("train-sync", "Train an audio-visual alignment network");
  add_manifest(tsync, c);
  add_out(tsync, c, "Checkpoint path");
  add_training(tsync, c, sync_cfg.max_epochs, sync_cfg.lr0, sync_cfg.early_stop_patience);
  tsync->add_option("--batch", sync_cfg.batch_videos, "Videos per step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tsync->add_option("--hidden", sync_cfg.hidden, "Hidden width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tsync->add_option("--radius", sync_cfg.neighborhood_radius, "Neighborhood radius in frames")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* ssync = app.add_subcommand("score-sync", "Score videos with an alignment network");
  add_manifest(ssync, c);
  add_checkpoint(ssync, c);
  add_out(ssync, c, "Predictions (JSON Lines)");
  add_jobs(ssync, c);

  auto* zs = app.add_subcommand("zero-shot-sync", "Training-free synchronization scores");
  add_manifest(zs, c);
  add_out(zs, c, "Output directory");
  zs->add_option("--pool", pools, "Pooling functions (default: all)")
      ->check(CLI::IsMember({"average", "max", "min", "lse", "scaled_lse", "percentile_3",
                             "percentile_97"}));
  zs->add_option("--delta", deltas, "Shift windows (default: 0 15)");
  zs->add_option("--min-overlap", min_overlap, "Minimum overlapping frames per shift")
      ->check(CLI::PositiveNumber);
  zs->add_flag("--layer-norm", layer_norm, "Standardize each frame before the cosine");
  add_jobs(zs, c);

  auto* ev = app.add_subcommand("eval", "AUC, AP, and localization AUC of predictions");
  add_manifest(ev, c);
  ev->add_option("--predictions", pred_paths, "Prediction files, one per run")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--name", names, "Run names (default: file stems)");
  ev->add_option("--out", c.out, "Write <out>.csv and <out>.json");

  auto* corr = app.add_subcommand("correlate", "Pearson correlation between runs");
  corr->add_option("--predictions", pred_paths, "Prediction files")
      ->required()
      ->check(CLI::ExistingFile);
  corr->add_option("--name", names, "Model names (default: file stems)");
  corr->add_option("--field", field, "Value to correlate")
      ->check(CLI::IsMember({"score", "prob"}))
      ->capture_default_str();
  corr->add_option("--out", c.out, "CSV output");

  auto* fuse = app.add_subcommand("fuse", "Average the probabilities of several runs");
  fuse->add_option("--predictions", pred_paths, "Prediction files")
      ->required()
      ->check(CLI::ExistingFile);
  add_out(fuse, c, "Fused predictions (JSON Lines)");

  auto* val = app.add_subcommand("validate", "Check FSEQ files and manifests");
  val->add_option("paths", validate_paths, "FSEQ files or .jsonl manifests")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("probekit");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(spec_path, c.out, synth_seed, out);
    if (tprobe->parsed()) return cmd_train_probe(c, probe_cfg, out);
    if (pred->parsed()) return cmd_predict(c, out, err);
    if (expl->parsed()) return cmd_explain(c, patches, saliency, clicks, out);
    if (tntp->parsed()) return cmd_train_ntp(c, ntp_cfg, out);
    if (sntp->parsed()) return cmd_score_ntp(c, out, err);
    if (tsync->parsed()) return cmd_train_sync(c, sync_cfg, out);
    if (ssync->parsed()) return cmd_score_sync(c, out, err);
    if (zs->parsed()) return cmd_zero_shot(c, pools, deltas, min_overlap, layer_norm, out, err);
    if (ev->parsed()) return cmd_eval(c, pred_paths, names, out);
    if (corr->parsed()) return cmd_correlate(c, pred_paths, names, field, out);
    if (fuse->parsed()) return cmd_fuse(c, pred_paths, out);
    if (val->parsed()) return cmd_validate(validate_paths, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace probekit
