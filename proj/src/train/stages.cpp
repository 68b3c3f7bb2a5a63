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

#include "depthvis/train/stages.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "depthvis/core/error.hpp"
#include "depthvis/model/checkpoint.hpp"
#include "depthvis/nn/ops.hpp"
#include "depthvis/track/refiner.hpp"
#include "depthvis/train/hungarian.hpp"

namespace depthvis::train {

namespace fs = std::filesystem;
using model::Variant;
using model::VisModel;

const char* to_string(Stage s) {
  switch (s) {
    case Stage::kImage: return "image";
    case Stage::kSegmenter: return "segmenter";
    case Stage::kTracker: return "tracker";
    case Stage::kRefiner: return "refiner";
  }
  return "image";
}

Stage stage_from_string(const std::string& name) {
  if (name == "image") return Stage::kImage;
  if (name == "segmenter") return Stage::kSegmenter;
  if (name == "tracker") return Stage::kTracker;
  if (name == "refiner") return Stage::kRefiner;
  throw Error(ErrorKind::kConfigError, "unknown stage '" + name + "'");
}

std::optional<Stage> predecessor(Stage s) {
  switch (s) {
    case Stage::kImage: return std::nullopt;
    case Stage::kSegmenter: return Stage::kImage;
    case Stage::kTracker: return Stage::kSegmenter;
    case Stage::kRefiner: return Stage::kTracker;
  }
  return std::nullopt;
}

nlohmann::json to_json(const LogRecord& r) {
  return {{"iter", r.iter},           {"stage", to_string(r.stage)}, {"loss_total", r.loss_total},
          {"loss_cls", r.loss_cls},   {"loss_mask", r.loss_mask},    {"loss_dice", r.loss_dice},
          {"loss_depth", r.loss_depth}, {"lr", r.lr}};
}

nlohmann::json config_echo(const StageConfig& cfg) {
  return {{"config",
           {{"stage", to_string(cfg.stage)},
            {"iters", cfg.iters},
            {"lr", cfg.lr},
            {"weight_decay", cfg.weight_decay},
            {"seed", cfg.seed},
            {"batch", cfg.batch},
            {"clip_length", cfg.clip_length}}}};
}

std::vector<std::string> trainable_prefixes(Stage stage, const VisModel& m) {
  switch (stage) {
    case Stage::kImage:
    case Stage::kSegmenter: {
      std::vector<std::string> p{model::kBackbonePrefix, model::kPixelDecoderPrefix, model::kDecoderPrefix};
      const Variant v = m.config().variant;
      if (v == Variant::kSv) p.push_back(model::kAdapterPrefix);
      if (model::has_depth_head(v)) p.push_back(model::kDepthHeadPrefix);
      if (v == Variant::kDsQuery) p.push_back(model::kQueryDepthPrefix);
      return p;
    }
    case Stage::kTracker: return {model::kTrackerPrefix};
    case Stage::kRefiner: return {model::kRefinerPrefix};
  }
  return {};
}

void apply_stage_freezing(VisModel& m, Stage stage) {
  m.params().freeze_all_except(trainable_prefixes(stage, m));
  for (const auto& prefix : m.always_frozen_prefixes()) m.params().set_frozen(prefix, true);
}

namespace {

std::mt19937_64 stage_rng(std::uint64_t seed, Stage stage) {
  return std::mt19937_64(nn::splitmix64(seed ^ nn::splitmix64(static_cast<std::uint64_t>(stage) + 101)));
}

int uniform_int(std::mt19937_64& rng, int n) {
  // Multiply-shift keeps the draw independent of the library's distributions.
  return static_cast<int>((static_cast<unsigned __int128>(rng()) * static_cast<unsigned>(n)) >> 64);
}

// Downsamples an H x W array to h x w by box averaging.
std::vector<double> box_down(const double* src, int H, int W, int h, int w) {
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  const int sy = H / h;
  const int sx = W / w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < sy; ++dy) {
        for (int dx = 0; dx < sx; ++dx) s += src[static_cast<std::size_t>(y * sy + dy) * W + x * sx + dx];
      }
      out[static_cast<std::size_t>(y) * w + x] = s / (sy * sx);
    }
  }
  return out;
}

struct FrameLoss {
  nn::Var total;
  double cls = 0.0;
  double mask = 0.0;
  double dice = 0.0;
  double depth = 0.0;
  Matching match;
};

FrameLoss frame_loss(const VisModel& m, const model::FrameOutput& out, const VideoData& video, int t,
                     const LossWeights& w) {
  const auto& gt = video.gt[t];
  const nn::Var up = upsample_mask_logits(out.mask_logits, out.mask_h, out.mask_w, video.height, video.width);
  Matching match;
  if (!gt.empty()) match = hungarian_match(matching_cost(out.class_logits.value(), up.value(), gt, w));
  const SegLoss seg = segmentation_loss(out.class_logits, up, gt, match, w);
  FrameLoss fl;
  fl.match = match;
  fl.cls = seg.cls.value()[0];
  fl.mask = seg.bce.value()[0];
  fl.dice = seg.dice.value()[0];
  fl.total = seg.total;
  const Variant v = m.config().variant;
  const double wd = m.config().depth_weight;
  if (wd > 0.0 && (v == Variant::kDs || v == Variant::kDsQuery)) {
    if (video.depth.empty()) {
      throw Error(ErrorKind::kConfigError, std::string(model::to_string(v)) + " needs depth pseudo-labels");
    }
    const std::size_t plane = static_cast<std::size_t>(video.height) * video.width;
    const double* target = video.depth.data() + t * plane;
    nn::Var dl;
    if (v == Variant::kDs) {
      dl = depth_loss_ssi(nn::reshape(out.depth, {static_cast<int>(plane)}), std::vector<double>(target, target + plane));
    } else {
      // Per-query depth inside each matched instance at mask resolution.
      const std::vector<double> tgt = box_down(target, video.height, video.width, out.mask_h, out.mask_w);
      std::vector<nn::Var> terms;
      for (const auto& [q, g] : match.pairs) {
        std::vector<double> md(gt[g].mask.data().begin(), gt[g].mask.data().end());
        const std::vector<double> frac = box_down(md.data(), video.height, video.width, out.mask_h, out.mask_w);
        std::vector<std::uint8_t> sel(frac.size());
        std::size_t count = 0;
        for (std::size_t i = 0; i < frac.size(); ++i) count += (sel[i] = frac[i] >= 0.5 ? 1 : 0);
        if (count < 2) continue;
        const nn::Var row = nn::slice_dim0(out.query_depth, q, q + 1);
        terms.push_back(depth_loss_ssi(nn::reshape(row, {static_cast<int>(frac.size())}), tgt, &sel));
      }
      if (!terms.empty()) dl = nn::weighted_sum(terms, std::vector<double>(terms.size(), 1.0 / terms.size()));
    }
    if (dl.defined()) {
      fl.depth = dl.value()[0];
      fl.total = nn::weighted_sum({fl.total, dl}, {1.0, wd});
    }
  }
  return fl;
}

std::vector<LogRecord> train_segmenter(VisModel& m, const StageConfig& cfg, const TrainSet& data,
                                       const LossWeights& w) {
  if (data.videos.empty()) throw Error(ErrorKind::kEmptyVideo, "training set has no videos");
  if (model::uses_depth_input(m.config().variant)) {
    for (const auto& v : data.videos) {
      if (v.depth.empty()) throw Error(ErrorKind::kConfigError, "edc needs a depth channel for every video");
    }
  }
  auto rng = stage_rng(cfg.seed, cfg.stage);
  nn::AdamW opt({cfg.lr, cfg.weight_decay, 0.9, 0.999, 1e-8, cfg.clip_norm});
  std::vector<LogRecord> log;
  const int V = static_cast<int>(data.videos.size());
  for (int it = 0; it < cfg.iters; ++it) {
    std::vector<std::pair<int, int>> items;
    if (cfg.stage == Stage::kImage) {
      for (int b = 0; b < cfg.batch; ++b) {
        const int vi = uniform_int(rng, V);
        items.emplace_back(vi, uniform_int(rng, data.videos[vi].frames));
      }
    } else {
      const int vi = uniform_int(rng, V);
      const int T = data.videos[vi].frames;
      const int len = std::min(cfg.clip_length, T);
      const int start = uniform_int(rng, T - len + 1);
      for (int t = start; t < start + len; ++t) items.emplace_back(vi, t);
    }
    const auto outs = m.forward(make_batch(data, items));
    std::vector<nn::Var> totals;
    std::vector<Matching> matches;
    LogRecord rec{it, cfg.stage, 0, 0, 0, 0, 0, cfg.lr};
    for (std::size_t b = 0; b < items.size(); ++b) {
      const FrameLoss fl = frame_loss(m, outs[b], data.videos[items[b].first], items[b].second, w);
      totals.push_back(fl.total);
      matches.push_back(fl.match);
      rec.loss_cls += fl.cls / items.size();
      rec.loss_mask += fl.mask / items.size();
      rec.loss_dice += fl.dice / items.size();
      rec.loss_depth += fl.depth / items.size();
    }
    nn::Var total = nn::weighted_sum(totals, std::vector<double>(totals.size(), 1.0 / totals.size()));
    if (cfg.stage == Stage::kSegmenter && cfg.contrastive_weight > 0.0) {
      // Matched queries of the same instance attract across the clip.
      std::vector<nn::Var> rows;
      std::vector<int> frame_of;
      std::vector<int> label;
      for (std::size_t b = 0; b < items.size(); ++b) {
        const auto& gt = data.videos[items[b].first].gt[items[b].second];
        for (const auto& [q, g] : matches[b].pairs) {
          rows.push_back(nn::slice_dim0(outs[b].query_embed, q, q + 1));
          frame_of.push_back(static_cast<int>(b));
          label.push_back(gt[g].instance_id);
        }
      }
      if (!rows.empty()) {
        const nn::Var z = nn::l2_normalize_rows(nn::concat_dim0(rows));
        const nn::Var c = contrastive_loss(z, frame_of, label, cfg.temperature);
        total = nn::weighted_sum({total, c}, {1.0, cfg.contrastive_weight});
      }
    }
    rec.loss_total = total.value()[0];
    m.params().zero_grad();
    nn::backward(total);
    opt.step(m.params());
    m.params().zero_grad();
    log.push_back(rec);
  }
  return log;
}

// Ground-truth instance matched to each query of a frame (-1 when unmatched).
std::vector<int> query_labels(const track::FrameQueries& f, const VideoData& video, int t, const LossWeights& w) {
  std::vector<int> labels(f.class_logits.dim(0), -1);
  const auto& gt = video.gt[t];
  if (gt.empty()) return labels;
  const nn::Var up = upsample_mask_logits(nn::constant(f.mask_logits), f.mask_h, f.mask_w, video.height, video.width);
  const Matching match = hungarian_match(matching_cost(f.class_logits, up.value(), gt, w));
  for (const auto& [q, g] : match.pairs) labels[q] = gt[g].instance_id;
  return labels;
}

std::vector<LogRecord> train_tracker(VisModel& m, const StageConfig& cfg, const TrainSet& data, const LossWeights& w) {
  const auto cache = segment_videos(m, data);
  std::vector<std::vector<std::vector<int>>> labels(data.videos.size());
  for (std::size_t vi = 0; vi < data.videos.size(); ++vi) {
    for (int t = 0; t < data.videos[vi].frames; ++t) {
      labels[vi].push_back(query_labels(cache[vi][t], data.videos[vi], t, w));
    }
  }
  auto rng = stage_rng(cfg.seed, cfg.stage);
  nn::AdamW opt({cfg.lr, cfg.weight_decay, 0.9, 0.999, 1e-8, cfg.clip_norm});
  const nn::Var proj = m.tracker_projection();
  std::vector<LogRecord> log;
  const int V = static_cast<int>(data.videos.size());
  for (int it = 0; it < cfg.iters; ++it) {
    const int vi = uniform_int(rng, V);
    const int T = data.videos[vi].frames;
    const int len = std::min(cfg.clip_length, T);
    const int start = uniform_int(rng, T - len + 1);
    std::vector<double> rows;
    std::vector<int> frame_of;
    std::vector<int> label;
    int E = 0;
    for (int t = start; t < start + len; ++t) {
      const auto& f = cache[vi][t];
      E = f.query_embed.dim(1);
      for (int q = 0; q < f.query_embed.dim(0); ++q) {
        if (labels[vi][t][q] < 0) continue;
        rows.insert(rows.end(), f.query_embed.data() + static_cast<std::size_t>(q) * E,
                    f.query_embed.data() + static_cast<std::size_t>(q + 1) * E);
        frame_of.push_back(t);
        label.push_back(labels[vi][t][q]);
      }
    }
    LogRecord rec{it, cfg.stage, 0, 0, 0, 0, 0, cfg.lr};
    if (!label.empty()) {
      const int M = static_cast<int>(label.size());
      const nn::Var z = nn::l2_normalize_rows(nn::linear(nn::constant(nn::Tensor({M, E}, rows)), proj, nn::Var()));
      const nn::Var loss = contrastive_loss(z, frame_of, label, cfg.temperature);
      rec.loss_total = loss.value()[0];
      m.params().zero_grad();
      nn::backward(loss);
      opt.step(m.params());
      m.params().zero_grad();
    }
    log.push_back(rec);
  }
  return log;
}

std::vector<LogRecord> train_refiner(VisModel& m, const StageConfig& cfg, const TrainSet& data, const LossWeights& w,
                                     const track::TrackerConfig& tcfg) {
  const auto cache = segment_videos(m, data);
  struct VideoTracks {
    track::TrackingResult tracking;
    std::vector<int> target;  // majority instance per track, -1 if none
  };
  std::vector<VideoTracks> tracks(data.videos.size());
  const nn::Tensor P = m.tracker_projection().value();
  for (std::size_t vi = 0; vi < data.videos.size(); ++vi) {
    const auto& video = data.videos[vi];
    auto& vt = tracks[vi];
    vt.tracking = track::track_video(cache[vi], P, video.height, video.width, tcfg);
    std::vector<std::vector<int>> labels;
    for (int t = 0; t < video.frames; ++t) labels.push_back(query_labels(cache[vi][t], video, t, w));
    for (const auto& qi : vt.tracking.query_index) {
      std::map<int, int> votes;
      for (int t = 0; t < video.frames; ++t) {
        if (qi[t] >= 0 && labels[t][qi[t]] >= 0) ++votes[labels[t][qi[t]]];
      }
      int best = -1;
      int best_votes = 0;
      for (const auto& [id, n] : votes) {
        if (n > best_votes) {
          best = id;
          best_votes = n;
        }
      }
      vt.target.push_back(best);
    }
  }
  auto rng = stage_rng(cfg.seed, cfg.stage);
  nn::AdamW opt({cfg.lr, cfg.weight_decay, 0.9, 0.999, 1e-8, cfg.clip_norm});
  const model::RefinerWeights rw = m.refiner_weights();
  const int V = static_cast<int>(data.videos.size());
  std::vector<LogRecord> log;
  for (int it = 0; it < cfg.iters; ++it) {
    const int vi = uniform_int(rng, V);
    const auto& video = data.videos[vi];
    const auto& vt = tracks[vi];
    std::vector<nn::Var> cls_terms;
    std::vector<nn::Var> bce_terms;
    std::vector<nn::Var> dice_terms;
    // Ground-truth masks must outlive the backward pass.
    std::vector<core::BinaryMask> masks;
    masks.reserve(vt.tracking.query_index.size() * video.frames);
    for (std::size_t k = 0; k < vt.tracking.query_index.size(); ++k) {
      const auto& qi = vt.tracking.query_index[k];
      std::vector<int> present;
      for (int t = 0; t < video.frames; ++t) {
        if (qi[t] >= 0) present.push_back(t);
      }
      if (present.empty()) continue;
      const int E = cache[vi][present[0]].query_embed.dim(1);
      nn::Tensor traj({static_cast<int>(present.size()), E});
      for (std::size_t i = 0; i < present.size(); ++i) {
        const auto& f = cache[vi][present[i]];
        for (int e = 0; e < E; ++e) traj.at(static_cast<int>(i), e) = f.query_embed.at(qi[present[i]], e);
      }
      const nn::Var refined = track::refine_trajectory(nn::constant(std::move(traj)), rw);
      for (std::size_t i = 0; i < present.size(); ++i) {
        const int t = present[i];
        const auto& f = cache[vi][t];
        const auto dec = m.decode_heads(nn::slice_dim0(refined, static_cast<int>(i), static_cast<int>(i) + 1),
                                        nn::constant(f.pixel_features));
        const GtInstance* target = nullptr;
        for (const auto& g : video.gt[t]) {
          if (g.instance_id == vt.target[k]) target = &g;
        }
        const int no_object = dec.class_logits.dim(1) - 1;
        if (target) {
          cls_terms.push_back(weighted_cross_entropy(dec.class_logits, {target->class_index}, {1.0}));
          masks.push_back(target->mask);
          const nn::Var up = upsample_mask_logits(dec.mask_logits, f.mask_h, f.mask_w, video.height, video.width);
          bce_terms.push_back(mask_bce_loss(up, {{0, &masks.back()}}));
          dice_terms.push_back(mask_dice_loss(up, {{0, &masks.back()}}));
        } else {
          cls_terms.push_back(nn::scale(weighted_cross_entropy(dec.class_logits, {no_object}, {1.0}), w.no_object));
        }
      }
    }
    LogRecord rec{it, cfg.stage, 0, 0, 0, 0, 0, cfg.lr};
    if (!cls_terms.empty()) {
      auto mean = [](const std::vector<nn::Var>& v) {
        return nn::weighted_sum(v, std::vector<double>(v.size(), 1.0 / v.size()));
      };
      std::vector<nn::Var> parts{mean(cls_terms)};
      std::vector<double> weights{w.cls};
      rec.loss_cls = parts[0].value()[0];
      if (!bce_terms.empty()) {
        parts.push_back(mean(bce_terms));
        parts.push_back(mean(dice_terms));
        weights.push_back(w.mask_bce);
        weights.push_back(w.mask_dice);
        rec.loss_mask = parts[1].value()[0];
        rec.loss_dice = parts[2].value()[0];
      }
      const nn::Var total = nn::weighted_sum(parts, weights);
      rec.loss_total = total.value()[0];
      if (total.requires_grad()) {
        m.params().zero_grad();
        nn::backward(total);
        opt.step(m.params());
        m.params().zero_grad();
      }
    }
    log.push_back(rec);
  }
  return log;
}

}  // namespace

std::vector<track::FrameQueries> segment_video(const VisModel& m, const TrainSet& data, int video) {
  nn::NoGradGuard no_grad;
  const auto& v = data.videos.at(video);
  std::vector<track::FrameQueries> out;
  constexpr int kChunk = 8;
  for (int t0 = 0; t0 < v.frames; t0 += kChunk) {
    std::vector<std::pair<int, int>> items;
    for (int t = t0; t < std::min(v.frames, t0 + kChunk); ++t) items.emplace_back(video, t);
    for (const auto& o : m.forward(make_batch(data, items))) out.push_back(track::detach(o));
  }
  return out;
}

std::vector<std::vector<track::FrameQueries>> segment_videos(const VisModel& m, const TrainSet& data) {
  std::vector<std::vector<track::FrameQueries>> out;
  for (std::size_t vi = 0; vi < data.videos.size(); ++vi) out.push_back(segment_video(m, data, static_cast<int>(vi)));
  return out;
}

std::vector<LogRecord> train_stage(VisModel& m, const StageConfig& cfg, const TrainSet& data, const LossWeights& weights,
                                   const track::TrackerConfig& tracker) {
  apply_stage_freezing(m, cfg.stage);
  LossWeights w = weights;
  w.depth = m.config().depth_weight;
  switch (cfg.stage) {
    case Stage::kImage:
    case Stage::kSegmenter: return train_segmenter(m, cfg, data, w);
    case Stage::kTracker: return train_tracker(m, cfg, data, w);
    case Stage::kRefiner: return train_refiner(m, cfg, data, w, tracker);
  }
  return {};
}

std::vector<LogRecord> pretrain_depth(VisModel& m, const TrainSet& data, int iters, double lr, std::uint64_t seed,
                                      int batch) {
  if (!model::has_depth_head(m.config().variant)) {
    throw Error(ErrorKind::kVariantMismatch, "depth pretraining needs a depth head");
  }
  m.params().freeze_all_except({model::kBackbonePrefix, model::kDepthHeadPrefix});
  std::mt19937_64 rng(nn::splitmix64(seed ^ 0x5eedULL));
  nn::AdamW opt({lr, 0.0, 0.9, 0.999, 1e-8, 0.0});
  std::vector<LogRecord> log;
  const int V = static_cast<int>(data.videos.size());
  for (int it = 0; it < iters; ++it) {
    std::vector<std::pair<int, int>> items;
    for (int b = 0; b < batch; ++b) {
      const int vi = uniform_int(rng, V);
      items.emplace_back(vi, uniform_int(rng, data.videos[vi].frames));
    }
    const model::FrameBatch fb = make_batch(data, items);
    if (fb.depth.empty()) throw Error(ErrorKind::kConfigError, "depth pretraining needs depth targets");
    const nn::Var pred = m.predict_depth(fb);
    const std::size_t plane = static_cast<std::size_t>(fb.height) * fb.width;
    std::vector<nn::Var> terms;
    for (int b = 0; b < fb.batch; ++b) {
      const nn::Var p = nn::reshape(nn::slice_dim0(pred, b, b + 1), {static_cast<int>(plane)});
      terms.push_back(depth_loss_ssi(p, std::vector<double>(fb.depth.begin() + b * plane, fb.depth.begin() + (b + 1) * plane)));
    }
    const nn::Var loss = nn::weighted_sum(terms, std::vector<double>(terms.size(), 1.0 / terms.size()));
    m.params().zero_grad();
    nn::backward(loss);
    opt.step(m.params());
    m.params().zero_grad();
    log.push_back({it, Stage::kImage, loss.value()[0], 0, 0, 0, loss.value()[0], lr});
  }
  m.params().set_frozen(model::kBackbonePrefix, true);
  m.params().set_frozen(model::kDepthHeadPrefix, true);
  return log;
}

void check_predecessor(Stage stage, const std::optional<fs::path>& checkpoint) {
  const auto pred = predecessor(stage);
  if (!pred) return;
  if (!checkpoint || !fs::exists(*checkpoint / "manifest.json")) {
    throw Error(ErrorKind::kMissingPredecessor, std::string("stage ") + to_string(stage) + " needs a " +
                                                    to_string(*pred) + " checkpoint" +
                                                    (checkpoint ? " at " + checkpoint->string() : std::string()));
  }
  const auto manifest = core::read_json_file(*checkpoint / "manifest.json");
  const std::string found = manifest.value("stage", std::string());
  if (found != to_string(*pred)) {
    throw Error(ErrorKind::kStageOrderViolation, std::string("stage ") + to_string(stage) + " must follow " +
                                                     to_string(*pred) + ", but " + checkpoint->string() +
                                                     " holds a '" + found + "' checkpoint");
  }
}

StageResult run_stage(const StageConfig& cfg, const model::ModelConfig& model_cfg, const TrainSet& data,
                      const fs::path& checkpoint_out, const fs::path& log_path, const LossWeights& weights,
                      const track::TrackerConfig& tracker) {
  check_predecessor(cfg.stage, cfg.init_from);
  StageResult result;
  std::vector<LogRecord> pre_log;
  if (cfg.stage == Stage::kImage && !cfg.init_from) {
    result.model = std::make_unique<VisModel>(model_cfg);
    if (model_cfg.variant == Variant::kSv && cfg.depth_pretrain_iters > 0) {
      pre_log = pretrain_depth(*result.model, data, cfg.depth_pretrain_iters, 1e-3, cfg.seed, cfg.batch);
    }
  } else {
    result.model = model::load_checkpoint(*cfg.init_from).model;
  }
  result.log = train_stage(*result.model, cfg, data, weights, tracker);
  model::save_checkpoint(*result.model, to_string(cfg.stage), checkpoint_out);
  if (!log_path.empty()) {
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    const fs::path tmp = log_path.string() + ".tmp";
    {
      std::ofstream f(tmp);
      f << config_echo(cfg).dump() << "\n";
      for (const auto& r : result.log) f << to_json(r).dump() << "\n";
      if (!f) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    }
    fs::rename(tmp, log_path);
  }
  return result;
}

}  // namespace depthvis::train
