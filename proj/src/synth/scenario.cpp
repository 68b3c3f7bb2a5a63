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

#include "depthvis/synth/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "depthvis/core/error.hpp"
#include "depthvis/core/rle.hpp"
#include "depthvis/depth/depth_cache.hpp"

namespace depthvis::synth {

namespace fs = std::filesystem;

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kCrossing: return "crossing";
    case ScenarioKind::kOcclusion: return "occlusion";
    case ScenarioKind::kExitEnter: return "exit_enter";
  }
  return "crossing";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "crossing") return ScenarioKind::kCrossing;
  if (name == "occlusion") return ScenarioKind::kOcclusion;
  if (name == "exit_enter") return ScenarioKind::kExitEnter;
  throw Error(ErrorKind::kInvalidSpec, "unknown scenario kind '" + name + "'");
}

const char* shape_name(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::kDisk: return "disk";
    case ShapeKind::kRectangle: return "rectangle";
    case ShapeKind::kTriangle: return "triangle";
  }
  return "disk";
}

nlohmann::json spec_to_json(const ScenarioSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"num_objects", spec.num_objects},
          {"frames", spec.frames},
          {"height", spec.height},
          {"width", spec.width},
          {"appearance_twin", spec.appearance_twin},
          {"seed", spec.seed},
          {"object_size", spec.object_size}};
}

ScenarioSpec spec_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  s.kind = scenario_kind_from_string(j.value("kind", std::string("crossing")));
  s.num_objects = j.value("num_objects", s.num_objects);
  s.frames = j.value("frames", s.frames);
  s.height = j.value("height", s.height);
  s.width = j.value("width", s.width);
  s.appearance_twin = j.value("appearance_twin", s.appearance_twin);
  s.seed = j.value("seed", s.seed);
  s.object_size = j.value("object_size", s.object_size);
  return s;
}

void validate(const ScenarioSpec& spec) {
  if (spec.frames < 2) throw Error(ErrorKind::kInvalidSpec, "frames must be >= 2");
  if (spec.height < 32 || spec.width < 32) {
    throw Error(ErrorKind::kInvalidSpec, "height and width must be >= 32");
  }
  if (spec.num_objects < 2) throw Error(ErrorKind::kInvalidSpec, "num_objects must be >= 2");
  if (spec.object_size < 0) throw Error(ErrorKind::kInvalidSpec, "object_size must be >= 0");
  if (spec.kind == ScenarioKind::kExitEnter && spec.frames < 6) {
    throw Error(ErrorKind::kInvalidSpec, "exit_enter needs at least 6 frames");
  }
}

ObjectState ObjectPrimitive::at(int t) const {
  return ObjectState{shape, appearance, trajectory[t][0], trajectory[t][1], depth_track[t], size};
}

namespace {

bool covers(const ObjectState& o, double px, double py) {
  const double dx = px - o.cx;
  const double dy = py - o.cy;
  const double r = o.size;
  switch (o.shape) {
    case ShapeKind::kDisk:
      return dx * dx + dy * dy <= r * r;
    case ShapeKind::kRectangle:
      return std::abs(dx) <= r && std::abs(dy) <= 0.75 * r;
    case ShapeKind::kTriangle:
      return dy >= -r && dy <= r && std::abs(dx) <= 0.5 * (dy + r);
  }
  return false;
}

std::array<uint8_t, 3> shade(const ObjectState& o, double px, double py) {
  // Stripes travel with the object so texture carries no positional cue.
  const double s = std::sin(2.0 * std::numbers::pi * (px - o.cx + 0.5 * (py - o.cy)) / 6.0 +
                            o.appearance.texture_phase);
  std::array<uint8_t, 3> c{};
  for (int k = 0; k < 3; ++k) {
    const double v = o.appearance.color[k] * (1.0 + 0.12 * s);
    c[k] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return c;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::array<uint8_t, 3> hue_color(double hue) {
  // Saturated colors well away from the dark background.
  const double h = std::fmod(hue, 1.0) * 6.0;
  const double f = h - std::floor(h);
  const double hi = 230.0;
  const double lo = 90.0;
  const double up = lo + (hi - lo) * f;
  const double down = hi - (hi - lo) * f;
  double r = 0;
  double g = 0;
  double b = 0;
  switch (static_cast<int>(std::floor(h)) % 6) {
    case 0: r = hi; g = up; b = lo; break;
    case 1: r = down; g = hi; b = lo; break;
    case 2: r = lo; g = hi; b = up; break;
    case 3: r = lo; g = down; b = hi; break;
    case 4: r = up; g = lo; b = hi; break;
    default: r = hi; g = lo; b = down; break;
  }
  return {static_cast<uint8_t>(std::lround(r)), static_cast<uint8_t>(std::lround(g)),
          static_cast<uint8_t>(std::lround(b))};
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

core::BinaryMask shape_coverage(const ObjectState& object, int height, int width) {
  core::BinaryMask m(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (covers(object, x + 0.5, y + 0.5)) m.set(y, x, true);
    }
  }
  return m;
}

RenderedFrame render_frame(const std::vector<ObjectState>& world, const RenderSettings& settings) {
  const int h = settings.height;
  const int w = settings.width;
  for (const auto& o : world) {
    if (!(o.z > 0.0)) throw Error(ErrorKind::kInvalidSpec, "object depth must be positive");
  }
  RenderedFrame out;
  out.rgb = core::RgbImage(h, w);
  for (int c = 0; c < 3; ++c) {
    std::fill_n(out.rgb.data.begin() + static_cast<std::ptrdiff_t>(c) * h * w,
                static_cast<std::ptrdiff_t>(h) * w, settings.background[c]);
  }
  std::vector<double> depth(static_cast<std::size_t>(h) * w, settings.far_depth);
  std::vector<int> owner(static_cast<std::size_t>(h) * w, -1);

  std::vector<int> order(world.size());
  std::iota(order.begin(), order.end(), 0);
  // Far to near; ties resolved by index so the result is deterministic.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return world[a].z > world[b].z; });
  for (int idx : order) {
    const auto& o = world[idx];
    const int x0 = std::max(0, static_cast<int>(std::floor(o.cx - o.size - 1)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(o.cx + o.size + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(o.cy - o.size - 1)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(o.cy + o.size + 1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!covers(o, x + 0.5, y + 0.5)) continue;
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        owner[i] = idx;
        depth[i] = o.z;
        const auto c = shade(o, x + 0.5, y + 0.5);
        for (int k = 0; k < 3; ++k) out.rgb.at(k, y, x) = c[k];
      }
    }
  }
  out.depth = depth::make_depth_map(h, w, std::move(depth), depth::DepthSource::kSyntheticGt);
  out.masks.assign(world.size(), core::BinaryMask(h, w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int o = owner[static_cast<std::size_t>(y) * w + x];
      if (o >= 0) out.masks[o].set(y, x, true);
    }
  }
  return out;
}

std::vector<core::Category> shape_categories() {
  std::vector<core::Category> cats;
  for (int k = 0; k < kNumShapeKinds; ++k) {
    cats.push_back({k + 1, shape_name(static_cast<ShapeKind>(k))});
  }
  return cats;
}

SyntheticVideo generate_scenario(const ScenarioSpec& spec, int video_index, int video_id,
                                 int first_annotation_id) {
  validate(spec);
  std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<uint64_t>(video_index) + 1)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n = spec.num_objects;
  const int T = spec.frames;
  const double H = spec.height;
  const double W = spec.width;
  const double base_size = spec.object_size > 0 ? spec.object_size : std::min(H, W) / 6.0;

  std::vector<ObjectPrimitive> objects(n);
  const ShapeKind twin_shape = static_cast<ShapeKind>(rng() % kNumShapeKinds);
  const Appearance twin_look{hue_color(unit(rng)), unit(rng) * 2.0 * std::numbers::pi};
  const double hue0 = unit(rng);

  // Distinct depths: consecutive objects are at least one unit apart.
  std::vector<double> zs(n);
  for (int i = 0; i < n; ++i) zs[i] = 1.0 + 2.0 * i + unit(rng);
  std::shuffle(zs.begin(), zs.end(), rng);
  if (spec.kind == ScenarioKind::kExitEnter || spec.kind == ScenarioKind::kOcclusion) {
    // The leaving (or occluding) object is the nearest; the entering one is farther.
    std::sort(zs.begin(), zs.end());
  }

  for (int i = 0; i < n; ++i) {
    auto& o = objects[i];
    if (spec.appearance_twin) {
      o.shape = twin_shape;
      o.appearance = twin_look;
      o.size = base_size;
    } else {
      o.shape = static_cast<ShapeKind>(rng() % kNumShapeKinds);
      o.appearance = {hue_color(hue0 + static_cast<double>(i) / n), unit(rng) * 2.0 * std::numbers::pi};
      o.size = base_size * (0.85 + 0.3 * unit(rng));
    }
    o.trajectory.resize(T);
    o.depth_track.assign(T, zs[i]);
  }

  const double r = base_size;
  switch (spec.kind) {
    case ScenarioKind::kCrossing: {
      for (int i = 0; i < n; ++i) {
        const double dir = (i % 2 == 0) ? 1.0 : -1.0;
        const double x_start = dir > 0 ? W * (0.12 + 0.08 * unit(rng)) : W * (0.88 - 0.08 * unit(rng));
        const double x_end = dir > 0 ? W * (0.88 - 0.08 * unit(rng)) : W * (0.12 + 0.08 * unit(rng));
        const double y_mid = H * 0.5 + (unit(rng) - 0.5) * 0.3 * r + (i / 2) * 0.6 * r * ((i / 2) % 2 ? 1 : -1);
        const double slope = (unit(rng) - 0.5) * 0.2 * H;
        for (int t = 0; t < T; ++t) {
          const double f = static_cast<double>(t) / (T - 1);
          objects[i].trajectory[t] = {lerp(x_start, x_end, f), y_mid + slope * (f - 0.5) * dir};
        }
      }
      break;
    }
    case ScenarioKind::kOcclusion: {
      // Object 0 (nearest) sweeps across; the others drift slowly behind its path.
      const double y_path = H * (0.4 + 0.2 * unit(rng));
      const double dir = unit(rng) < 0.5 ? 1.0 : -1.0;
      for (int t = 0; t < T; ++t) {
        const double f = static_cast<double>(t) / (T - 1);
        const double x = dir > 0 ? lerp(-0.2 * r, W + 0.2 * r, f) : lerp(W + 0.2 * r, -0.2 * r, f);
        objects[0].trajectory[t] = {x, y_path};
      }
      for (int i = 1; i < n; ++i) {
        const double x0 = W * (0.25 + 0.5 * unit(rng));
        const double y0 = y_path + (unit(rng) - 0.5) * 0.6 * r;
        const double vx = (unit(rng) - 0.5) * 0.1 * r;
        for (int t = 0; t < T; ++t) objects[i].trajectory[t] = {x0 + vx * t, y0};
      }
      break;
    }
    case ScenarioKind::kExitEnter: {
      // A leaves through one border by frame ceil(T/2); B enters two frames later
      // through the opposite border.
      const int exit_frame = (T + 1) / 2;
      const int enter_frame = exit_frame + 2;
      const double dir = unit(rng) < 0.5 ? 1.0 : -1.0;
      const double y_a = H * (0.35 + 0.3 * unit(rng));
      const double y_b = H * (0.35 + 0.3 * unit(rng));
      const double a_start = dir > 0 ? W * (0.4 + 0.15 * unit(rng)) : W * (0.6 - 0.15 * unit(rng));
      const double a_gone = dir > 0 ? W + 1.6 * r : -1.6 * r;
      const double speed = std::abs(a_gone - a_start) / exit_frame;
      for (int t = 0; t < T; ++t) {
        const double x = t >= exit_frame ? a_gone : a_start + dir * speed * t;
        objects[0].trajectory[t] = {x, y_a};
      }
      const double b_entry = dir > 0 ? 0.2 * r : W - 0.2 * r;
      for (int t = 0; t < T; ++t) {
        double x = 0.0;
        if (t < enter_frame) {
          x = dir > 0 ? -1.6 * r : W + 1.6 * r;
        } else {
          x = b_entry + dir * speed * (t - enter_frame);
        }
        objects[1].trajectory[t] = {x, y_b};
      }
      for (int i = 2; i < n; ++i) {
        const double x0 = W * (0.3 + 0.4 * unit(rng));
        const double y0 = H * (0.25 + 0.5 * unit(rng));
        const double vy = (unit(rng) - 0.5) * 0.1 * r;
        for (int t = 0; t < T; ++t) objects[i].trajectory[t] = {x0, y0 + vy * t};
      }
      break;
    }
  }

  RenderSettings settings;
  settings.height = spec.height;
  settings.width = spec.width;
  settings.far_depth = 10.0 * *std::max_element(zs.begin(), zs.end());

  SyntheticVideo video;
  video.objects = objects;
  video.gt.annotations.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& ann = video.gt.annotations[i];
    ann.id = first_annotation_id + i;
    ann.video_id = video_id;
    ann.category_id = static_cast<int>(objects[i].shape) + 1;
    ann.instance_id = i + 1;
    ann.segmentations.resize(T);
  }
  for (int t = 0; t < T; ++t) {
    std::vector<ObjectState> world;
    world.reserve(n);
    for (const auto& o : objects) world.push_back(o.at(t));
    RenderedFrame frame = render_frame(world, settings);
    std::vector<double> vis(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const std::size_t visible = frame.masks[i].area();
      const std::size_t full = shape_coverage(world[i], spec.height, spec.width).area();
      vis[i] = full == 0 ? 0.0 : static_cast<double>(visible) / static_cast<double>(full);
      if (visible > 0) video.gt.annotations[i].segmentations[t] = core::rle_encode(frame.masks[i]);
    }
    video.gt.visibility.push_back(std::move(vis));
    video.gt.depth.push_back(std::move(frame.depth));
    video.frames.push_back(std::move(frame.rgb));
  }
  return video;
}

fs::path video_dir(const fs::path& root, int video_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d", video_id);
  return root / "videos" / buf;
}

std::string frame_file_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.png", t);
  return buf;
}

SyntheticDataset generate_dataset(const DatasetSuite& suite) {
  if (suite.specs.size() != suite.counts.size()) {
    throw Error(ErrorKind::kInvalidSpec, "suite specs and counts differ in length");
  }
  SyntheticDataset out;
  out.annotations.categories = shape_categories();
  int video_id = 1;
  int ann_id = 1;
  for (std::size_t g = 0; g < suite.specs.size(); ++g) {
    const auto& spec = suite.specs[g];
    for (int k = 0; k < suite.counts[g]; ++k, ++video_id) {
      SyntheticVideo v = generate_scenario(spec, k, video_id, ann_id);
      ann_id += static_cast<int>(v.gt.annotations.size());
      core::VideoInfo info{video_id, spec.width, spec.height, spec.frames, {}};
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%06d", video_id);
      for (int t = 0; t < spec.frames; ++t) {
        info.file_names.push_back(std::string("videos/") + buf + "/frames/" + frame_file_name(t));
      }
      out.annotations.videos.push_back(std::move(info));
      for (const auto& a : v.gt.annotations) out.annotations.annotations.push_back(a);
      out.videos.push_back(std::move(v));
    }
  }
  return out;
}

core::Dataset write_dataset(const fs::path& root, const DatasetSuite& suite) {
  SyntheticDataset data = generate_dataset(suite);
  fs::create_directories(root);
  for (std::size_t i = 0; i < data.videos.size(); ++i) {
    const auto& info = data.annotations.videos[i];
    const auto& v = data.videos[i];
    const fs::path dir = video_dir(root, info.id);
    fs::create_directories(dir / "frames");
    for (std::size_t t = 0; t < v.frames.size(); ++t) {
      core::write_png_rgb(dir / "frames" / frame_file_name(static_cast<int>(t)), v.frames[t]);
    }
    depth::write_depth_cache(v.gt.depth, dir / "depth");
  }
  nlohmann::json specs = nlohmann::json::array();
  for (std::size_t g = 0; g < suite.specs.size(); ++g) {
    auto j = spec_to_json(suite.specs[g]);
    j["num_videos"] = suite.counts[g];
    specs.push_back(std::move(j));
  }
  core::write_json_file(root / "spec.json", nlohmann::json{{"scenarios", specs}}, 2);
  core::write_json_file(root / "annotations.json", core::dataset_to_json(data.annotations));
  return data.annotations;
}

}  // namespace depthvis::synth
