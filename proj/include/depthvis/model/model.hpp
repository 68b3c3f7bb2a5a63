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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "depthvis/model/config.hpp"
#include "depthvis/model/layers.hpp"
#include "depthvis/nn/parameters.hpp"

namespace depthvis::model {

// A batch of frames in model layout.
struct FrameBatch {
  int batch = 0;
  int height = 0;
  int width = 0;
  std::vector<double> rgb;    // B x 3 x H x W, raw 0..255
  std::vector<double> depth;  // B x H x W, normalised to [0,1]; empty when unavailable
};

// Per-frame segmenter output (the query set, masks and pixel features).
struct FrameOutput {
  Var class_logits;    // [N, C+1], last column is "no object"
  Var query_embed;     // [N, E]
  Var mask_embed;      // [N, E]
  Var mask_logits;     // [N, h*w] at stride 4
  Var pixel_features;  // [h*w, E]
  int mask_h = 0;
  int mask_w = 0;
  Var depth;        // [1, 1, H, W] auxiliary depth (ds, ds_query, sv)
  Var query_depth;  // [N, h*w] per-query depth logits (ds_query)
};

struct RefinerWeights {
  Var wq;
  Var wk;
  Var wv;
  Var wo;
};

// Parameter groups, by name prefix.
inline constexpr const char* kBackbonePrefix = "backbone.";
inline constexpr const char* kAdapterPrefix = "adapter.";
inline constexpr const char* kPixelDecoderPrefix = "pixel_decoder.";
inline constexpr const char* kDecoderPrefix = "decoder.";
inline constexpr const char* kDepthHeadPrefix = "depth_head.";
inline constexpr const char* kQueryDepthPrefix = "query_depth.";
inline constexpr const char* kTrackerPrefix = "tracker.";
inline constexpr const char* kRefinerPrefix = "refiner.";

// Segmenter plus the tracker projection and refiner weights, all in one
// parameter set so a checkpoint captures the whole pipeline.
class VisModel {
 public:
  explicit VisModel(ModelConfig cfg);
  VisModel(const VisModel&) = delete;
  VisModel& operator=(const VisModel&) = delete;

  // Deep copy with independent parameter storage.
  std::unique_ptr<VisModel> clone() const;

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  std::vector<FrameOutput> forward(const FrameBatch& batch) const;

  // Class and mask logits for arbitrary query embeddings [N,E] against one
  // frame's pixel features [h*w,E] using the segmenter heads.
  struct Decoded {
    Var class_logits;
    Var mask_logits;
  };
  Decoded decode_heads(const Var& queries, const Var& pixel_features) const;

  // Per-query depth logits [N, h*w]; throws VariantMismatch outside ds_query.
  Var decode_query_depth(const Var& queries, const Var& pixel_features) const;

  // Depth head output [B,1,H,W]; throws VariantMismatch when there is no depth head.
  Var predict_depth(const FrameBatch& batch) const;

  Var tracker_projection() const { return params_.get("tracker.proj"); }
  RefinerWeights refiner_weights() const;

  // Name of the first layer whose input channels carry RGB(+D).
  std::string input_layer_name() const;
  // Name of the adapter's first spatial-prior convolution (sv only).
  static constexpr const char* kSpatialPriorInput = "adapter.spatial_prior.0.w";

  // Prefixes that are frozen regardless of stage (the shared backbone and its
  // depth head in sv).
  std::vector<std::string> always_frozen_prefixes() const;

 private:
  struct Impl;
  ModelConfig cfg_;
  nn::ParameterSet params_;
  std::shared_ptr<const Impl> impl_;

  struct Features {
    std::vector<Var> maps;  // strides 4, 8, 16, ...
  };
  Var input_tensor(const FrameBatch& batch, bool with_depth, const std::vector<double>* depth) const;
  Features backbone_forward(const Var& x, int batch) const;
  Var depth_head_forward(const Features& f, int height, int width) const;
  std::vector<double> sv_depth_input(const FrameBatch& batch, Var* depth_out,
                                     Features* backbone) const;
};

// First-layer channel surgery: [O,3,k,k] -> [O,4,k,k] with the RGB slices copied
// and the depth slice either zero or the per-position RGB mean. Throws BadShape.
nn::Tensor expand_input_channels(const nn::Tensor& weights, EdcInit mode);

// Converts a trained 3-channel rgb_baseline model into an edc model, copying
// every parameter and expanding the input layer.
std::unique_ptr<VisModel> convert_to_edc(const VisModel& rgb, EdcInit mode);

// Builds an sv model from a backbone (and depth head) that must already be
// frozen. Throws ConfigError if the adapter declares an injector or the shared
// parameters are trainable.
std::unique_ptr<VisModel> build_sv_model(const VisModel& shared_backbone, const AdapterConfig& adapter,
                                         const ModelConfig& base);

// Copies values for every parameter present in both sets (shapes must agree).
void copy_parameters(const nn::ParameterSet& from, nn::ParameterSet& to,
                     const std::vector<std::string>& prefixes = {});

}  // namespace depthvis::model
