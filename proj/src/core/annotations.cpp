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

#include "depthvis/core/annotations.hpp"

#include <fstream>

#include "depthvis/core/error.hpp"

namespace depthvis::core {

using nlohmann::json;

const VideoInfo* Dataset::find_video(int video_id) const {
  for (const auto& v : videos) {
    if (v.id == video_id) return &v;
  }
  return nullptr;
}

std::vector<const VideoAnnotation*> Dataset::annotations_for(int video_id) const {
  std::vector<const VideoAnnotation*> out;
  for (const auto& a : annotations) {
    if (a.video_id == video_id) out.push_back(&a);
  }
  return out;
}

json rle_to_json(const Rle& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

Rle rle_from_json(const json& j) {
  Rle rle;
  const auto& size = j.at("size");
  if (!size.is_array() || size.size() != 2) {
    throw Error(ErrorKind::kSizeMismatch, "rle size must be [h, w]");
  }
  rle.height = size[0].get<int>();
  rle.width = size[1].get<int>();
  if (!j.at("counts").is_array()) {
    throw Error(ErrorKind::kSizeMismatch, "compressed rle strings are not supported");
  }
  rle.counts = j.at("counts").get<std::vector<uint32_t>>();
  return rle;
}

namespace {

json segs_to_json(const std::vector<std::optional<Rle>>& segs) {
  json arr = json::array();
  for (const auto& s : segs) {
    arr.push_back(s ? rle_to_json(*s) : json(nullptr));
  }
  return arr;
}

std::vector<std::optional<Rle>> segs_from_json(const json& arr) {
  std::vector<std::optional<Rle>> segs;
  for (const auto& s : arr) {
    if (s.is_null()) {
      segs.emplace_back(std::nullopt);
    } else {
      segs.emplace_back(rle_from_json(s));
    }
  }
  return segs;
}

}  // namespace

json dataset_to_json(const Dataset& ds) {
  json videos = json::array();
  for (const auto& v : ds.videos) {
    videos.push_back({{"id", v.id},
                      {"width", v.width},
                      {"height", v.height},
                      {"length", v.length},
                      {"file_names", v.file_names}});
  }
  json cats = json::array();
  for (const auto& c : ds.categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  json anns = json::array();
  for (const auto& a : ds.annotations) {
    anns.push_back({{"id", a.id},
                    {"video_id", a.video_id},
                    {"category_id", a.category_id},
                    {"instance_id", a.instance_id},
                    {"segmentations", segs_to_json(a.segmentations)}});
  }
  return json{{"videos", videos}, {"categories", cats}, {"annotations", anns}};
}

Dataset dataset_from_json(const json& j) {
  Dataset ds;
  for (const auto& v : j.at("videos")) {
    VideoInfo info;
    info.id = v.at("id").get<int>();
    info.width = v.at("width").get<int>();
    info.height = v.at("height").get<int>();
    info.length = v.at("length").get<int>();
    if (v.contains("file_names")) info.file_names = v.at("file_names").get<std::vector<std::string>>();
    ds.videos.push_back(std::move(info));
  }
  for (const auto& c : j.at("categories")) {
    ds.categories.push_back({c.at("id").get<int>(), c.value("name", std::string{})});
  }
  for (const auto& a : j.at("annotations")) {
    VideoAnnotation ann;
    ann.id = a.at("id").get<int>();
    ann.video_id = a.at("video_id").get<int>();
    ann.category_id = a.at("category_id").get<int>();
    ann.instance_id = a.value("instance_id", ann.id);
    ann.segmentations = segs_from_json(a.at("segmentations"));
    const VideoInfo* video = ds.find_video(ann.video_id);
    if (video != nullptr) {
      if (static_cast<int>(ann.segmentations.size()) != video->length) {
        throw Error(ErrorKind::kSizeMismatch, "annotation " + std::to_string(ann.id) +
                                                  " has wrong number of frames");
      }
      for (const auto& s : ann.segmentations) {
        if (s && (s->height != video->height || s->width != video->width)) {
          throw Error(ErrorKind::kSizeMismatch, "annotation " + std::to_string(ann.id) +
                                                    " size differs from its video");
        }
      }
    }
    ds.annotations.push_back(std::move(ann));
  }
  return ds;
}

json predictions_to_json(const std::vector<Prediction>& preds) {
  json arr = json::array();
  for (const auto& p : preds) {
    json e{{"video_id", p.video_id},
           {"category_id", p.category_id},
           {"score", p.score},
           {"segmentations", segs_to_json(p.segmentations)}};
    if (p.track_id) e["track_id"] = *p.track_id;
    arr.push_back(std::move(e));
  }
  return arr;
}

std::vector<Prediction> predictions_from_json(const json& j) {
  std::vector<Prediction> preds;
  for (const auto& e : j) {
    Prediction p;
    p.video_id = e.at("video_id").get<int>();
    p.category_id = e.at("category_id").get<int>();
    p.score = e.at("score").get<double>();
    p.segmentations = segs_from_json(e.at("segmentations"));
    if (e.contains("track_id")) p.track_id = e.at("track_id").get<int>();
    preds.push_back(std::move(p));
  }
  return preds;
}

MaskTrack decode_segmentations(const std::vector<std::optional<Rle>>& segs) {
  MaskTrack masks;
  masks.reserve(segs.size());
  for (const auto& s : segs) {
    masks.push_back(s ? std::optional<BinaryMask>(rle_decode(*s)) : std::nullopt);
  }
  return masks;
}

std::vector<std::optional<Rle>> encode_segmentations(const MaskTrack& masks) {
  std::vector<std::optional<Rle>> segs;
  segs.reserve(masks.size());
  for (const auto& m : masks) {
    segs.push_back(m ? std::optional<Rle>(rle_encode(*m)) : std::nullopt);
  }
  return segs;
}

json tracks_to_json(int video_id, const std::vector<InstanceTrack>& tracks) {
  json arr = json::array();
  for (const auto& t : tracks) {
    arr.push_back({{"track_id", t.track_id},
                   {"category_id", t.category_id},
                   {"score", t.score},
                   {"segmentations", segs_to_json(encode_segmentations(t.masks))}});
  }
  return json{{"video_id", video_id}, {"tracks", arr}};
}

std::vector<InstanceTrack> tracks_from_json(const json& j, int* video_id) {
  if (video_id != nullptr) *video_id = j.at("video_id").get<int>();
  std::vector<InstanceTrack> tracks;
  for (const auto& e : j.at("tracks")) {
    InstanceTrack t;
    t.track_id = e.at("track_id").get<int>();
    t.category_id = e.at("category_id").get<int>();
    t.score = e.at("score").get<double>();
    t.masks = decode_segmentations(segs_from_json(e.at("segmentations")));
    tracks.push_back(std::move(t));
  }
  return tracks;
}

Prediction track_to_prediction(int video_id, const InstanceTrack& track) {
  return Prediction{video_id, track.category_id, track.score,
                    encode_segmentations(track.masks), track.track_id};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << j.dump(indent) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace depthvis::core
