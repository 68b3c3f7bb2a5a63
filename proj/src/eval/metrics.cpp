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

#include "depthvis/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "depthvis/core/error.hpp"
#include "depthvis/core/iou.hpp"

namespace depthvis::eval {

std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  // Exact decimal thresholds, so an IoU of 3/5 meets 0.6.
  for (int i = 0; i < 10; ++i) t.push_back((50.0 + 5.0 * i) / 100.0);
  return t;
}

namespace {


// Precision at the 101 recall points, after making precision non-increasing.
double interpolated_ap(const std::vector<int>& tp_flags, int num_gt) {
  const std::size_t n = tp_flags.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  double tp = 0;
  double fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += tp_flags[i];
    fp += 1 - tp_flags[i];
    recall[i] = tp / num_gt;
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double thr = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), thr - 1e-12);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / 101.0;
}

}  // namespace

MetricsReport evaluate_ap(const std::vector<EvalPrediction>& predictions, const core::Dataset& gt,
                          const EvalOptions& options) {
  const std::vector<double> thresholds =
      options.iou_thresholds.empty() ? default_iou_thresholds() : options.iou_thresholds;
  std::set<int> known;
  for (const auto& c : gt.categories) known.insert(c.id);
  for (const auto& p : predictions) {
    if (!known.count(p.category_id)) {
      throw Error(ErrorKind::kUnknownCategory, "prediction category " + std::to_string(p.category_id) +
                                                   " is not in the ground-truth vocabulary");
    }
  }
  const std::size_t nthr = thresholds.size();
  const std::vector<int> max_dets{1, 10, options.max_dets};

  // results[d][thr] per category
  std::map<int, std::vector<std::vector<double>>> ap_at;      // cat -> [thr] (max_dets = options.max_dets)
  std::map<int, std::vector<std::vector<double>>> recall_at;  // cat -> [d][thr]

  for (const auto& cat : gt.categories) {
    struct VideoWork {
      std::vector<const core::VideoAnnotation*> gts;
      std::vector<std::size_t> dts;  // prediction indices sorted by score
    };
    std::vector<VideoWork> work;
    int num_gt = 0;
    for (const auto& v : gt.videos) {
      VideoWork w;
      for (const auto* a : gt.annotations_for(v.id)) {
        if (a->category_id == cat.id) w.gts.push_back(a);
      }
      for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].video_id == v.id && predictions[i].category_id == cat.id) w.dts.push_back(i);
      }
      std::stable_sort(w.dts.begin(), w.dts.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].score > predictions[b].score;
      });
      num_gt += static_cast<int>(w.gts.size());
      work.push_back(std::move(w));
    }
    if (num_gt == 0) continue;

    std::vector<std::vector<double>> recall_d(max_dets.size(), std::vector<double>(nthr, 0.0));
    std::vector<double> ap_t(nthr, 0.0);
    for (std::size_t d = 0; d < max_dets.size(); ++d) {
      // Per threshold: (score, order, tp) for every kept detection.
      std::vector<std::vector<std::tuple<double, std::size_t, int>>> flags(nthr);
      for (std::size_t vi = 0; vi < work.size(); ++vi) {
        const auto& w = work[vi];
        const std::size_t keep = std::min<std::size_t>(w.dts.size(), max_dets[d]);
        std::vector<core::MaskTrack> gt_masks;
        for (const auto* a : w.gts) gt_masks.push_back(core::decode_segmentations(a->segmentations));
        std::vector<std::vector<double>> iou(keep, std::vector<double>(w.gts.size(), 0.0));
        for (std::size_t i = 0; i < keep; ++i) {
          for (std::size_t g = 0; g < w.gts.size(); ++g) {
            iou[i][g] = core::tube_iou(predictions[w.dts[i]].masks, gt_masks[g]);
          }
        }
        for (std::size_t t = 0; t < nthr; ++t) {
          std::vector<char> taken(w.gts.size(), 0);
          for (std::size_t i = 0; i < keep; ++i) {
            int best = -1;
            double best_iou = std::min(thresholds[t], 1.0 - 1e-10);
            for (std::size_t g = 0; g < w.gts.size(); ++g) {
              if (taken[g] || iou[i][g] < best_iou) continue;
              if (best >= 0 && iou[i][g] == best_iou) continue;  // keep the lower index on ties
              best = static_cast<int>(g);
              best_iou = iou[i][g];
            }
            if (best >= 0) taken[best] = 1;
            flags[t].emplace_back(predictions[w.dts[i]].score, w.dts[i], best >= 0 ? 1 : 0);
          }
        }
      }
      for (std::size_t t = 0; t < nthr; ++t) {
        auto& f = flags[t];
        std::stable_sort(f.begin(), f.end(), [](const auto& a, const auto& b) {
          if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
          return std::get<1>(a) < std::get<1>(b);
        });
        std::vector<int> tp;
        int total_tp = 0;
        for (const auto& e : f) {
          tp.push_back(std::get<2>(e));
          total_tp += std::get<2>(e);
        }
        recall_d[d][t] = static_cast<double>(total_tp) / num_gt;
        if (max_dets[d] == options.max_dets) ap_t[t] = f.empty() ? 0.0 : interpolated_ap(tp, num_gt);
      }
    }
    ap_at[cat.id] = {ap_t};
    recall_at[cat.id] = recall_d;
  }

  MetricsReport rep;
  if (ap_at.empty()) return rep;
  auto threshold_index = [&](double v) -> int {
    for (std::size_t t = 0; t < nthr; ++t) {
      if (std::abs(thresholds[t] - v) < 1e-9) return static_cast<int>(t);
    }
    return -1;
  };
  const int i50 = threshold_index(0.5);
  const int i75 = threshold_index(0.75);
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ar1 = 0.0;
  double ar10 = 0.0;
  for (const auto& [cat, rows] : ap_at) {
    const auto& a = rows[0];
    const double mean_ap = std::accumulate(a.begin(), a.end(), 0.0) / nthr;
    rep.per_category_ap[cat] = 100.0 * mean_ap;
    ap += mean_ap;
    if (i50 >= 0) ap50 += a[i50];
    if (i75 >= 0) ap75 += a[i75];
    const auto& r = recall_at[cat];
    ar1 += std::accumulate(r[0].begin(), r[0].end(), 0.0) / nthr;
    ar10 += std::accumulate(r[1].begin(), r[1].end(), 0.0) / nthr;
  }
  const double nc = static_cast<double>(ap_at.size());
  rep.ap = 100.0 * ap / nc;
  rep.ap50 = 100.0 * ap50 / nc;
  rep.ap75 = 100.0 * ap75 / nc;
  rep.ar1 = 100.0 * ar1 / nc;
  rep.ar10 = 100.0 * ar10 / nc;
  return rep;
}

int id_switch_count(const std::vector<IdTrack>& predicted, const std::vector<IdTrack>& ground_truth,
                    double min_iou) {
  int switches = 0;
  for (const auto& g : ground_truth) {
    int prev = -1;
    bool have_prev = false;
    for (std::size_t t = 0; t < g.masks.size(); ++t) {
      if (!g.masks[t] || g.masks[t]->empty_mask()) continue;
      int best_id = 0;
      double best = -1.0;
      for (const auto& p : predicted) {
        if (t >= p.masks.size() || !p.masks[t]) continue;
        const double iou = core::mask_iou(*p.masks[t], *g.masks[t]);
        if (iou >= min_iou && iou > best) {
          best = iou;
          best_id = p.id;
        }
      }
      if (best < 0.0) continue;
      if (have_prev && best_id != prev) ++switches;
      prev = best_id;
      have_prev = true;
    }
  }
  return switches;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [c, v] : r.per_category_ap) per[std::to_string(c)] = v;
  return {{"AP", r.ap},   {"AP50", r.ap50}, {"AP75", r.ap75},       {"AR1", r.ar1},
          {"AR10", r.ar10}, {"per_category_AP", per}, {"id_switches", r.id_switches}};
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.ap = j.at("AP").get<double>();
  r.ap50 = j.at("AP50").get<double>();
  r.ap75 = j.at("AP75").get<double>();
  r.ar1 = j.at("AR1").get<double>();
  r.ar10 = j.at("AR10").get<double>();
  for (const auto& [c, v] : j.at("per_category_AP").items()) r.per_category_ap[std::stoi(c)] = v.get<double>();
  r.id_switches = j.at("id_switches").get<int>();
  return r;
}

}  // namespace depthvis::eval
