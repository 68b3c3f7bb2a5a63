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

#include "depthvis/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "depthvis/core/error.hpp"

namespace depthvis::model {

namespace {

using nn::InitKind;
using nn::InitSpec;
using nn::Tensor;

struct ResBlock {
  Conv2d c1;
  Conv2d c2;

  Var operator()(const Var& x) const {
    const Var y = c2(nn::relu(c1(x)));
    return nn::relu(nn::add(x, y));
  }
};

struct ConvStage {
  Conv2d down;
  std::vector<ResBlock> blocks;
};

struct VitBlock {
  LayerNorm ln1;
  Attention attn;
  LayerNorm ln2;
  Mlp mlp;
};

struct DecoderLayer {
  Attention cross;
  LayerNorm norm1;
  Attention self;
  LayerNorm norm2;
  Linear ffn1;
  Linear ffn2;
  LayerNorm norm3;
};

// Top-down fusion of a feature pyramid into stride-4 maps.
struct Fpn {
  std::vector<Conv2d> laterals;
  Conv2d out;

  Var operator()(const std::vector<Var>& maps) const {
    Var p = laterals.back()(maps.back());
    for (int i = static_cast<int>(maps.size()) - 2; i >= 0; --i) {
      const Var lat = laterals[i](maps[i]);
      p = nn::add(lat, nn::upsample_bilinear(p, lat.dim(2), lat.dim(3)));
    }
    return out(nn::relu(p));
  }
};

Fpn make_fpn(nn::ParameterSet& ps, const std::string& name, const std::vector<int>& in_channels,
             int dim) {
  Fpn f;
  for (std::size_t i = 0; i < in_channels.size(); ++i) {
    f.laterals.push_back(make_conv(ps, name + ".lateral" + std::to_string(i), in_channels[i], dim, 1, 1));
  }
  f.out = make_conv(ps, name + ".out", dim, dim, 3, 1);
  return f;
}

}  // namespace

struct VisModel::Impl {
  // conv_small
  Conv2d stem;
  std::vector<ResBlock> stem_blocks;
  std::vector<ConvStage> stages;
  // vit_tiny
  Conv2d patch;
  Tensor patch_pos;  // filled lazily per grid size
  std::vector<VitBlock> vit_blocks;
  LayerNorm vit_norm;
  Conv2d vit_up;
  std::vector<int> feature_channels;

  // sv adapter
  std::vector<Conv2d> spatial_prior;  // strides 2, 4, 8, 16
  std::vector<Conv2d> fuse;           // per pyramid level

  Fpn pixel_decoder;
  Var query_feat;
  Var query_pos;
  std::vector<DecoderLayer> layers;
  LayerNorm decoder_norm;
  Linear class_head;
  Mlp mask_mlp;

  Fpn depth_fpn;
  Conv2d depth_out;
  Mlp query_depth_mlp;
};

VisModel::VisModel(ModelConfig cfg) : cfg_(std::move(cfg)), params_(cfg_.seed) {
  validate(cfg_);
  auto impl = std::make_shared<Impl>();
  auto& ps = params_;
  const auto& bb = cfg_.backbone;
  const int E = cfg_.embed_dim;

  if (bb.kind == BackboneKind::kConvSmall) {
    impl->stem = make_conv(ps, "backbone.stem", bb.in_channels, bb.widths[0], 3, 2);
    auto make_block = [&](const std::string& name, int w) {
      return ResBlock{make_conv(ps, name + ".c1", w, w, 3, 1),
                      make_conv(ps, name + ".c2", w, w, 3, 1, {InitKind::kHe, 0.5})};
    };
    for (int d = 0; d < bb.depths[0]; ++d) {
      impl->stem_blocks.push_back(make_block("backbone.stem_block" + std::to_string(d), bb.widths[0]));
    }
    for (std::size_t k = 1; k < bb.widths.size(); ++k) {
      ConvStage st;
      const std::string name = "backbone.stage" + std::to_string(k);
      st.down = make_conv(ps, name + ".down", bb.widths[k - 1], bb.widths[k], 3, 2);
      for (int d = 0; d < bb.depths[k]; ++d) {
        st.blocks.push_back(make_block(name + ".block" + std::to_string(d), bb.widths[k]));
      }
      impl->stages.push_back(std::move(st));
      impl->feature_channels.push_back(bb.widths[k]);
    }
  } else {
    const int D = bb.dim;
    impl->patch = make_conv(ps, "backbone.patch", bb.in_channels, D, bb.patch, bb.patch);
    impl->patch.pad = 0;
    for (int i = 0; i < bb.blocks; ++i) {
      const std::string name = "backbone.block" + std::to_string(i);
      impl->vit_blocks.push_back({make_layer_norm(ps, name + ".ln1", D), make_attention(ps, name + ".attn", D),
                                  make_layer_norm(ps, name + ".ln2", D),
                                  make_mlp(ps, name + ".mlp", D, D * bb.mlp_ratio, D, 2)});
    }
    impl->vit_norm = make_layer_norm(ps, "backbone.norm", D);
    impl->vit_up = make_conv(ps, "backbone.up4", D, D, 3, 1);
    impl->feature_channels = {D, D, D};
  }

  std::vector<int> decoder_in = impl->feature_channels;
  if (cfg_.variant == Variant::kSv) {
    const int A = cfg_.adapter.width;
    // Spatial prior: RGB + normalised predicted depth.
    impl->spatial_prior.push_back(make_conv(ps, "adapter.spatial_prior.0", 4, A, 3, 2));
    for (int i = 1; i < 4; ++i) {
      impl->spatial_prior.push_back(make_conv(ps, "adapter.spatial_prior." + std::to_string(i), A, A, 3, 2));
    }
    for (std::size_t i = 0; i < impl->feature_channels.size(); ++i) {
      impl->fuse.push_back(make_conv(ps, "adapter.fuse" + std::to_string(i), impl->feature_channels[i], A, 1, 1));
    }
    decoder_in.assign(impl->feature_channels.size(), A);
  }

  impl->pixel_decoder = make_fpn(ps, "pixel_decoder", decoder_in, E);
  impl->query_feat = ps.add("decoder.query_feat", {cfg_.num_queries, E}, {InitKind::kNormal, 1.0});
  impl->query_pos = ps.add("decoder.query_pos", {cfg_.num_queries, E}, {InitKind::kNormal, 1.0});
  for (int l = 0; l < cfg_.decoder_layers; ++l) {
    const std::string name = "decoder.layer" + std::to_string(l);
    impl->layers.push_back({make_attention(ps, name + ".cross", E), make_layer_norm(ps, name + ".norm1", E),
                            make_attention(ps, name + ".self", E), make_layer_norm(ps, name + ".norm2", E),
                            make_linear(ps, name + ".ffn1", E, cfg_.ffn_dim, {InitKind::kHe, 1.0}),
                            make_linear(ps, name + ".ffn2", cfg_.ffn_dim, E),
                            make_layer_norm(ps, name + ".norm3", E)});
  }
  impl->decoder_norm = make_layer_norm(ps, "decoder.norm", E);
  impl->class_head = make_linear(ps, "decoder.class_head", E, cfg_.num_classes + 1);
  impl->mask_mlp = make_mlp(ps, "decoder.mask_mlp", E, E, E, 3);

  if (has_depth_head(cfg_.variant)) {
    impl->depth_fpn = make_fpn(ps, "depth_head", impl->feature_channels, cfg_.depth_dim);
    impl->depth_out = make_conv(ps, "depth_head.pred", cfg_.depth_dim, 1, 1, 1);
  }
  if (cfg_.variant == Variant::kDsQuery) {
    impl->query_depth_mlp = make_mlp(ps, "query_depth.mlp", E, E, E, 2);
  }

  ps.add("tracker.proj", {E, E}, {InitKind::kIdentity, 1.0});
  ps.add("refiner.wq", {E, E}, {InitKind::kXavier, 1.0});
  ps.add("refiner.wk", {E, E}, {InitKind::kXavier, 1.0});
  ps.add("refiner.wv", {E, E}, {InitKind::kXavier, 1.0});
  // Zero output projection: the refiner starts as the identity map.
  ps.add("refiner.wo", {E, E}, {InitKind::kZeros});

  impl_ = std::move(impl);
  for (const auto& prefix : always_frozen_prefixes()) params_.set_frozen(prefix, true);
}

std::unique_ptr<VisModel> VisModel::clone() const {
  auto out = std::make_unique<VisModel>(cfg_);
  copy_parameters(params_, out->params_);
  for (const auto& p : params_.entries()) out->params_.entry(p.name).frozen = p.frozen;
  for (auto& p : out->params_.entries()) p.var.set_requires_grad(!p.frozen);
  return out;
}

std::vector<std::string> VisModel::always_frozen_prefixes() const {
  if (cfg_.variant == Variant::kSv) return {kBackbonePrefix, kDepthHeadPrefix};
  return {};
}

std::string VisModel::input_layer_name() const {
  return cfg_.backbone.kind == BackboneKind::kConvSmall ? "backbone.stem.w" : "backbone.patch.w";
}

RefinerWeights VisModel::refiner_weights() const {
  return {params_.get("refiner.wq"), params_.get("refiner.wk"), params_.get("refiner.wv"),
          params_.get("refiner.wo")};
}

Var VisModel::input_tensor(const FrameBatch& batch, bool with_depth,
                           const std::vector<double>* depth) const {
  const int B = batch.batch;
  const int H = batch.height;
  const int W = batch.width;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  if (batch.rgb.size() != static_cast<std::size_t>(B) * 3 * plane) {
    throw Error(ErrorKind::kShapeMismatch, "frame batch rgb has the wrong size");
  }
  const int C = with_depth ? 4 : 3;
  if (with_depth && (!depth || depth->size() != static_cast<std::size_t>(B) * plane)) {
    throw Error(ErrorKind::kShapeMismatch,
                std::string(to_string(cfg_.variant)) + " needs a depth channel for every frame");
  }
  Tensor x({B, C, H, W});
  for (int b = 0; b < B; ++b) {
    for (int c = 0; c < 3; ++c) {
      const double* src = batch.rgb.data() + (static_cast<std::size_t>(b) * 3 + c) * plane;
      double* dst = x.data() + (static_cast<std::size_t>(b) * C + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = (src[i] / 255.0 - 0.5) / 0.5;
    }
    if (with_depth) {
      const double* src = depth->data() + static_cast<std::size_t>(b) * plane;
      double* dst = x.data() + (static_cast<std::size_t>(b) * C + 3) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = (src[i] - 0.5) / 0.5;
    }
  }
  return nn::constant(std::move(x));
}

VisModel::Features VisModel::backbone_forward(const Var& x, int batch) const {
  const Impl& m = *impl_;
  Features f;
  if (cfg_.backbone.kind == BackboneKind::kConvSmall) {
    Var h = nn::relu(m.stem(x));
    for (const auto& blk : m.stem_blocks) h = blk(h);
    for (const auto& st : m.stages) {
      h = nn::relu(st.down(h));
      for (const auto& blk : st.blocks) h = blk(h);
      f.maps.push_back(h);
    }
    return f;
  }
  const Var patches = m.patch(x);
  const int gh = patches.dim(2);
  const int gw = patches.dim(3);
  const Var pos = nn::constant(sine_position_2d(gh, gw, cfg_.backbone.dim));
  std::vector<Var> per_image;
  for (int b = 0; b < batch; ++b) {
    Var t = nn::add(nn::image_tokens(patches, b), pos);
    for (const auto& blk : m.vit_blocks) {
      const Var n1 = blk.ln1(t);
      t = nn::add(t, blk.attn(n1, n1, n1));
      t = nn::add(t, blk.mlp(blk.ln2(t)));
    }
    per_image.push_back(nn::tokens_to_image(m.vit_norm(t), gh, gw));
  }
  const Var f8 = per_image.size() == 1 ? per_image[0] : nn::concat_dim0(per_image);
  f.maps.push_back(m.vit_up(nn::upsample_bilinear(f8, gh * 2, gw * 2)));
  f.maps.push_back(f8);
  f.maps.push_back(nn::avg_pool2(f8));
  return f;
}

Var VisModel::depth_head_forward(const Features& f, int height, int width) const {
  const Impl& m = *impl_;
  const Var d4 = m.depth_out(nn::relu(m.depth_fpn(f.maps)));
  return nn::upsample_bilinear(d4, height, width);
}

Var VisModel::predict_depth(const FrameBatch& batch) const {
  if (!has_depth_head(cfg_.variant)) {
    throw Error(ErrorKind::kVariantMismatch, std::string(to_string(cfg_.variant)) + " has no depth head");
  }
  const bool with_depth = false;
  const Var x = input_tensor(batch, with_depth, nullptr);
  return depth_head_forward(backbone_forward(x, batch.batch), batch.height, batch.width);
}

std::vector<double> VisModel::sv_depth_input(const FrameBatch& batch, Var* depth_out,
                                             Features* backbone) const {
  const Var x = input_tensor(batch, false, nullptr);
  *backbone = backbone_forward(x, batch.batch);
  *depth_out = depth_head_forward(*backbone, batch.height, batch.width);
  // Per-frame min-max normalisation, as for externally supplied depth.
  const std::size_t plane = static_cast<std::size_t>(batch.height) * batch.width;
  std::vector<double> d(depth_out->value().values());
  for (int b = 0; b < batch.batch; ++b) {
    double* p = d.data() + b * plane;
    const auto [lo, hi] = std::minmax_element(p, p + plane);
    const double mn = *lo;
    const double mx = *hi;
    for (std::size_t i = 0; i < plane; ++i) p[i] = mx > mn ? (p[i] - mn) / (mx - mn) : 0.5;
  }
  return d;
}

std::vector<FrameOutput> VisModel::forward(const FrameBatch& batch) const {
  const Impl& m = *impl_;
  const int B = batch.batch;
  const int H = batch.height;
  const int W = batch.width;
  Features feats;
  Var depth_map;
  if (cfg_.variant == Variant::kSv) {
    Features vit;
    const std::vector<double> d = sv_depth_input(batch, &depth_map, &vit);
    Var h = input_tensor(batch, true, &d);
    std::vector<Var> sp;
    for (const auto& conv : m.spatial_prior) {
      h = nn::relu(conv(h));
      sp.push_back(h);
    }
    // sp[1..3] sit at strides 4, 8, 16; fuse with the frozen backbone's pyramid.
    for (std::size_t i = 0; i < m.fuse.size(); ++i) {
      feats.maps.push_back(nn::add(sp[i + 1], m.fuse[i](vit.maps[i])));
    }
  } else {
    const bool with_depth = uses_depth_input(cfg_.variant);
    const Var x = input_tensor(batch, with_depth, &batch.depth);
    feats = backbone_forward(x, B);
    if (has_depth_head(cfg_.variant)) depth_map = depth_head_forward(feats, H, W);
  }

  const Var pix = m.pixel_decoder(feats.maps);
  const int h = pix.dim(2);
  const int w = pix.dim(3);
  const int E = cfg_.embed_dim;
  const Var pos = nn::constant(sine_position_2d(h, w, E));

  std::vector<FrameOutput> out(B);
  for (int b = 0; b < B; ++b) {
    const Var mem = nn::image_tokens(pix, b);
    const Var mem_key = nn::add(mem, pos);
    Var q = m.query_feat;
    for (const auto& L : m.layers) {
      q = L.norm1(nn::add(q, L.cross(nn::add(q, m.query_pos), mem_key, mem)));
      const Var qp = nn::add(q, m.query_pos);
      q = L.norm2(nn::add(q, L.self(qp, qp, q)));
      q = L.norm3(nn::add(q, L.ffn2(nn::relu(L.ffn1(q)))));
    }
    q = m.decoder_norm(q);
    FrameOutput& o = out[b];
    o.query_embed = q;
    o.class_logits = m.class_head(q);
    o.mask_embed = m.mask_mlp(q);
    o.mask_logits = nn::matmul_nt(o.mask_embed, mem);
    o.pixel_features = mem;
    o.mask_h = h;
    o.mask_w = w;
    if (depth_map.defined()) o.depth = B == 1 ? depth_map : nn::slice_dim0(depth_map, b, b + 1);
    if (cfg_.variant == Variant::kDsQuery) o.query_depth = decode_query_depth(q, mem);
  }
  return out;
}

VisModel::Decoded VisModel::decode_heads(const Var& queries, const Var& pixel_features) const {
  const Impl& m = *impl_;
  return {m.class_head(queries), nn::matmul_nt(m.mask_mlp(queries), pixel_features)};
}

Var VisModel::decode_query_depth(const Var& queries, const Var& pixel_features) const {
  if (cfg_.variant != Variant::kDsQuery) {
    throw Error(ErrorKind::kVariantMismatch, "query depth decoding requires the ds_query variant");
  }
  return nn::matmul_nt(impl_->query_depth_mlp(queries), pixel_features);
}

nn::Tensor expand_input_channels(const nn::Tensor& weights, EdcInit mode) {
  if (weights.rank() != 4 || weights.dim(1) != 3) {
    throw Error(ErrorKind::kBadShape, "expected [O,3,k,k] weights, got " + weights.shape_string());
  }
  const int O = weights.dim(0);
  const int kk = weights.dim(2) * weights.dim(3);
  Tensor out({O, 4, weights.dim(2), weights.dim(3)}, 0.0);
  for (int o = 0; o < O; ++o) {
    const double* src = weights.data() + static_cast<std::size_t>(o) * 3 * kk;
    double* dst = out.data() + static_cast<std::size_t>(o) * 4 * kk;
    std::copy(src, src + 3 * kk, dst);
    if (mode == EdcInit::kRgbMean) {
      for (int i = 0; i < kk; ++i) dst[3 * kk + i] = (src[i] + src[kk + i] + src[2 * kk + i]) / 3.0;
    }
  }
  return out;
}

void copy_parameters(const nn::ParameterSet& from, nn::ParameterSet& to,
                     const std::vector<std::string>& prefixes) {
  for (const auto& p : from.entries()) {
    if (!to.contains(p.name)) continue;
    if (!prefixes.empty() &&
        std::none_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& pre) { return p.name.rfind(pre, 0) == 0; })) {
      continue;
    }
    auto& dst = to.entry(p.name);
    if (!dst.var.value().same_shape(p.var.value())) {
      throw Error(ErrorKind::kShapeMismatch, "parameter " + p.name + " has shape " +
                                                 p.var.value().shape_string() + ", expected " +
                                                 dst.var.value().shape_string());
    }
    dst.var.mutable_value() = p.var.value();
  }
}

std::unique_ptr<VisModel> convert_to_edc(const VisModel& rgb, EdcInit mode) {
  if (rgb.config().backbone.in_channels != 3) {
    throw Error(ErrorKind::kVariantMismatch, "channel expansion needs a 3-channel model");
  }
  ModelConfig cfg = rgb.config();
  cfg.variant = Variant::kEdc;
  cfg.backbone.in_channels = 4;
  cfg.edc_init = mode;
  auto out = std::make_unique<VisModel>(cfg);
  const std::string first = rgb.input_layer_name();
  for (const auto& p : rgb.params().entries()) {
    if (!out->params().contains(p.name)) continue;
    auto& dst = out->params().entry(p.name);
    dst.var.mutable_value() = p.name == first ? expand_input_channels(p.var.value(), mode) : p.var.value();
  }
  return out;
}

std::unique_ptr<VisModel> build_sv_model(const VisModel& shared_backbone, const AdapterConfig& adapter,
                                         const ModelConfig& base) {
  if (adapter.injector) {
    throw Error(ErrorKind::kConfigError, "the shared-backbone model has no injector path");
  }
  for (const auto& p : shared_backbone.params().entries()) {
    const bool shared = p.name.rfind(kBackbonePrefix, 0) == 0 || p.name.rfind(kDepthHeadPrefix, 0) == 0;
    if (shared && !p.frozen) {
      throw Error(ErrorKind::kConfigError, "shared backbone parameter " + p.name + " is not frozen");
    }
  }
  ModelConfig cfg = base;
  cfg.variant = Variant::kSv;
  cfg.adapter = adapter;
  cfg.backbone = shared_backbone.config().backbone;
  cfg.depth_dim = shared_backbone.config().depth_dim;
  auto out = std::make_unique<VisModel>(cfg);
  copy_parameters(shared_backbone.params(), out->params(), {kBackbonePrefix, kDepthHeadPrefix});
  return out;
}

}  // namespace depthvis::model
