// Copyright 2026 The depthvis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "depthvis/cli/commands.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "depthvis/cli/overlay.hpp"
#include "depthvis/cli/run_config.hpp"
#include "depthvis/core/error.hpp"
#include "depthvis/depth/depth_cache.hpp"
#include "depthvis/harness/experiment.hpp"
#include "depthvis/harness/inference.hpp"
#include "depthvis/model/checkpoint.hpp"
#include "depthvis/synth/scenario.hpp"
#include "depthvis/train/stages.hpp"

namespace depthvis::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void say(const std::string& tag, const std::string& msg) {
  std::cout << "[" << tag << "] " << msg << "\n" << std::flush;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path require_root(const RunConfig& cfg) {
  if (cfg.data.root.empty()) throw Error(ErrorKind::kConfigError, "data.root is not set");
  return cfg.data.root;
}

// Depth is needed as model input (edc) or as a training target (depth heads).
bool needs_depth(model::Variant v, bool training) {
  return model::uses_depth_input(v) || (training && model::has_depth_head(v));
}

struct SynthArgs {
  std::string scenarios = "crossing";
  int num_videos = 10;
  std::uint64_t seed = 0;
  int frames = 12;
  int height = 48;
  int width = 48;
  int num_objects = 2;
  bool twin = false;
  std::string out;
};

int cmd_synth_gen(const SynthArgs& a) {
  std::vector<std::string> kinds;
  std::stringstream ss(a.scenarios);
  for (std::string k; std::getline(ss, k, ',');) {
    if (!k.empty()) kinds.push_back(k);
  }
  if (kinds.empty()) throw Error(ErrorKind::kInvalidSpec, "no scenario given");
  if (a.num_videos < 1) throw Error(ErrorKind::kInvalidSpec, "--num-videos must be >= 1");
  synth::DatasetSuite suite;
  const int n = static_cast<int>(kinds.size());
  for (int i = 0; i < n; ++i) {
    synth::ScenarioSpec s;
    s.kind = synth::scenario_kind_from_string(kinds[i]);
    s.num_objects = a.num_objects;
    s.frames = a.frames;
    s.height = a.height;
    s.width = a.width;
    s.appearance_twin = a.twin;
    s.seed = a.seed + static_cast<std::uint64_t>(i);
    synth::validate(s);
    suite.specs.push_back(s);
    suite.counts.push_back(a.num_videos / n + (i < a.num_videos % n ? 1 : 0));
  }
  const auto ds = synth::write_dataset(a.out, suite);
  say("synth-gen", "wrote " + std::to_string(ds.videos.size()) + " videos to " + a.out);
  return 0;
}

int cmd_prepare_depth(const RunConfig& cfg) {
  const fs::path root = require_root(cfg);
  const auto ds = core::dataset_from_json(core::read_json_file(root / "annotations.json"));
  const auto level = depth::degrade_level_from_string(cfg.data.degrade_level);
  if (cfg.data.depth_source == "external" && cfg.data.estimator.empty()) {
    throw Error(ErrorKind::kConfigError, "data.depth_source external needs data.estimator");
  }
  for (const auto& info : ds.videos) {
    const fs::path vdir = synth::video_dir(root, info.id);
    std::vector<depth::DepthMap> maps;
    if (cfg.data.depth_source == "gt") {
      maps = depth::read_depth_cache(vdir / "depth");
    } else {
      const fs::path work = vdir / ".estimator_work";
      maps = depth::estimate_depth_external(vdir / "frames", cfg.data.estimator, work);
      fs::remove_all(work);
    }
    if (static_cast<int>(maps.size()) != info.length) {
      throw Error(ErrorKind::kCorruptCache, "depth for video " + std::to_string(info.id) + " has " +
                                                std::to_string(maps.size()) + " frames, expected " +
                                                std::to_string(info.length));
    }
    for (std::size_t t = 0; t < maps.size(); ++t) {
      maps[t] = depth::degrade_depth(maps[t], level, train::degrade_seed(cfg.train.seed, info.id, static_cast<int>(t)));
    }
    depth::write_depth_cache(maps, vdir / kDepthInputDir);
    say("prepare-depth video " + std::to_string(info.id),
        std::to_string(maps.size()) + " frames from " + cfg.data.depth_source + ", degrade " + cfg.data.degrade_level);
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& init) {
  train::StageConfig sc = stage_config(cfg);
  const fs::path out = cfg.out_dir;
  const std::string stage = train::to_string(sc.stage);
  if (!init.empty()) {
    sc.init_from = fs::path(init);
  } else if (const auto pred = train::predecessor(sc.stage)) {
    sc.init_from = out / "checkpoints" / train::to_string(*pred);
  }
  train::check_predecessor(sc.stage, sc.init_from);
  const model::ModelConfig mc = model_config(cfg);
  if (sc.init_from) {
    const json manifest = core::read_json_file(*sc.init_from / "manifest.json");
    const std::string found = manifest.at("model").at("variant").get<std::string>();
    if (found != cfg.model.variant) {
      throw Error(ErrorKind::kVariantMismatch, "config variant '" + cfg.model.variant + "' but checkpoint " +
                                                   sc.init_from->string() + " holds '" + found + "'");
    }
  }
  const bool depth = needs_depth(mc.variant, sc.stage == train::Stage::kImage || sc.stage == train::Stage::kSegmenter);
  const train::TrainSet data = train::load_train_set(require_root(cfg), kDepthInputDir, depth);
  say("train:" + stage, std::to_string(data.videos.size()) + " videos, " + std::to_string(sc.iters) + " iterations");
  const fs::path ckpt = out / "checkpoints" / stage;
  const fs::path log = out / "logs" / (stage + ".ndjson");
  const auto result = train::run_stage(sc, mc, data, ckpt, log);
  if (!result.log.empty()) {
    say("train:" + stage, "loss " + fmt("%.4f", result.log.front().loss_total) + " -> " +
                              fmt("%.4f", result.log.back().loss_total));
  }
  say("train:" + stage, "checkpoint " + ckpt.string() + ", log " + log.string());
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& ckpt, const std::string& split, bool offline,
             const std::string& out_path) {
  const auto loaded = model::load_checkpoint(ckpt);
  const model::VisModel& m = *loaded.model;
  const fs::path root = split.empty() ? require_root(cfg) : fs::path(split);
  const train::TrainSet data =
      train::load_train_set(root, kDepthInputDir, needs_depth(m.config().variant, false));
  eval::EvalOptions opts;
  opts.iou_thresholds = cfg.eval.iou_thresholds;
  const fs::path out = out_path.empty() ? fs::path(cfg.out_dir) / "metrics.json" : fs::path(out_path);
  json result{{"checkpoint", ckpt},
              {"stage", loaded.stage},
              {"variant", model::to_string(m.config().variant)},
              {"split", root.string()},
              {"videos", data.videos.size()}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::vector<bool> modes{false};
  if (offline) modes.push_back(true);
  for (bool off : modes) {
    const std::string mode = off ? "offline" : "online";
    const auto run = harness::evaluate_model(m, data, off, {}, opts);
    result[mode] = eval::to_json(run.report);
    result[mode]["num_predictions"] = run.predictions.size();
    core::write_json_file(out.parent_path() / ("predictions_" + mode + ".json"),
                          core::predictions_to_json(run.predictions));
    say("eval:" + mode, "AP " + fmt("%.2f", run.report.ap) + " AP50 " + fmt("%.2f", run.report.ap50) +
                            " AR10 " + fmt("%.2f", run.report.ar10) + " id_switches " +
                            std::to_string(run.report.id_switches));
  }
  core::write_json_file(out, result, 2);
  say("eval", "wrote " + out.string());
  return 0;
}

int cmd_visualize(const std::string& video, const std::string& tracks_path, const std::string& out) {
  std::vector<core::InstanceTrack> tracks;
  if (!tracks_path.empty()) {
    const json doc = core::read_json_file(tracks_path);
    if (doc.is_array()) {
      // An eval predictions file: keep the tracks of this video, named by its directory.
      const std::string name = fs::path(video).lexically_normal().filename().string();
      const std::string stem = name.empty() ? fs::path(video).parent_path().filename().string() : name;
      int id = -1;
      try {
        id = std::stoi(stem);
      } catch (const std::exception&) {
        throw Error(ErrorKind::kConfigError, "cannot infer a video id from " + video);
      }
      for (const auto& p : core::predictions_from_json(doc)) {
        if (p.video_id != id) continue;
        core::InstanceTrack t;
        t.track_id = p.track_id.value_or(static_cast<int>(tracks.size()) + 1);
        t.category_id = p.category_id;
        t.score = p.score;
        t.masks = core::decode_segmentations(p.segmentations);
        tracks.push_back(std::move(t));
      }
    } else {
      tracks = core::tracks_from_json(doc);
    }
  }
  const int n = render_overlays(video, tracks, out);
  say("visualize", std::to_string(n) + " frames written to " + out);
  return 0;
}

harness::ExperimentPlan load_plan(const std::string& path) {
  return path.empty() ? harness::default_plan() : harness::plan_from_json(core::read_json_file(path));
}

int print_table(const harness::ComparisonTable& t, const fs::path& root) {
  std::cout << harness::format_table(t);
  say("results", (root / t.plan_hash).string());
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

int run_cli(const std::vector<std::string>& input) {
  CLI::App app{"depthvis: depth-aware video instance segmentation at desk scale"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.\n\n" + schema_text());

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "RunConfig JSON document");
    sub->add_option("--set", overrides, "Override a config leaf, e.g. --set train.seed=9 (repeatable)");
  };

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic dataset");
  synth->add_option("--scenario", synth_args.scenarios, "crossing | occlusion | exit_enter, comma separated");
  synth->add_option("--num-videos", synth_args.num_videos, "Total number of videos");
  synth->add_option("--seed", synth_args.seed, "Base seed (scenario i uses seed + i)");
  synth->add_option("--frames", synth_args.frames, "Frames per video");
  synth->add_option("--height", synth_args.height, "Frame height");
  synth->add_option("--width", synth_args.width, "Frame width");
  synth->add_option("--num-objects", synth_args.num_objects, "Objects per video");
  synth->add_flag("--twin", synth_args.twin, "Give every object the same appearance");
  synth->add_option("--out", synth_args.out, "Output directory")->required();

  auto* prep = app.add_subcommand("prepare-depth", "Write the model depth input (videos/*/depth_input)");
  add_config(prep);
  std::string root_override;
  prep->add_option("--root", root_override, "Dataset root (overrides data.root)");

  auto* trn = app.add_subcommand("train", "Run one training stage");
  add_config(trn);
  std::string stage_override;
  std::string init;
  trn->add_option("--stage", stage_override, "image | segmenter | tracker | refiner (overrides train.stage)");
  trn->add_option("--init", init, "Predecessor checkpoint (default <out_dir>/checkpoints/<predecessor>)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_config(ev);
  std::string ckpt;
  std::string split;
  std::string metrics_out;
  bool offline = false;
  ev->add_option("--ckpt", ckpt, "Checkpoint directory")->required();
  ev->add_option("--split", split, "Dataset root to evaluate (default data.root)");
  ev->add_flag("--offline", offline, "Also evaluate refined tracks");
  ev->add_option("--out", metrics_out, "metrics.json path (default <out_dir>/metrics.json)");

  std::string plan_path;
  std::string results = "results";
  auto add_plan = [&](CLI::App* sub) {
    sub->add_option("--plan", plan_path, "Experiment plan JSON (default: built-in plan)");
    sub->add_option("--out", results, "Results root");
  };
  auto* cmp = app.add_subcommand("compare", "Variant comparison over seeds");
  add_plan(cmp);
  auto* abl = app.add_subcommand("ablate", "Ablation tables");
  abl->require_subcommand(1);
  auto* abl_q = abl->add_subcommand("depth-quality", "EDC with clean vs degraded depth");
  add_plan(abl_q);
  auto* abl_s = abl->add_subcommand("edc-stage", "EDC from the image stage vs the segmenter stage vs none");
  add_plan(abl_s);

  std::string video;
  std::string tracks;
  std::string vis_out;
  auto* vis = app.add_subcommand("visualize", "Render track overlays");
  vis->add_option("--video", video, "Video directory containing frames/")->required();
  vis->add_option("--tracks", tracks, "Track dump JSON or an eval predictions file");
  vis->add_option("--out", vis_out, "Output directory")->required();

  std::vector<std::string> rev(input.rbegin(), input.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth_gen(synth_args);
    if (vis->parsed()) return cmd_visualize(video, tracks, vis_out);
    if (cmp->parsed()) return print_table(harness::run_comparison(load_plan(plan_path), results), results);
    if (abl_q->parsed()) return print_table(harness::ablate_depth_quality(load_plan(plan_path), results), results);
    if (abl_s->parsed()) return print_table(harness::ablate_edc_stage(load_plan(plan_path), results), results);
    RunConfig cfg = load_config(config_path, overrides);
    if (!root_override.empty()) cfg.data.root = root_override;
    if (!stage_override.empty()) {
      train::stage_from_string(stage_override);
      cfg.train.stage = stage_override;
    }
    if (prep->parsed()) return cmd_prepare_depth(cfg);
    if (trn->parsed()) return cmd_train(cfg, init);
    if (ev->parsed()) return cmd_eval(cfg, ckpt, split, offline, metrics_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace depthvis::cli
