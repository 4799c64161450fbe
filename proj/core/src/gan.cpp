/* Copyright 2026 The iterdraw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "iterdraw/gan.hpp"

#include <algorithm>
#include <stdexcept>

namespace iterdraw {

namespace F = torch::nn::functional;

namespace {

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::int64_t v) {
  int n = 0;
  while ((std::int64_t{1} << n) < v) ++n;
  return n;
}

std::int64_t gen_channels(const ModelDims& dims, std::int64_t resolution) {
  const std::int64_t mult = std::clamp<std::int64_t>(dims.image_side / (2 * resolution), 1, 16);
  return dims.gen_width * mult;
}

torch::Tensor upsample2(const torch::Tensor& x) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kNearest));
}

torch::Tensor avgpool2(const torch::Tensor& x) { return F::avg_pool2d(x, F::AvgPool2dFuncOptions(2)); }

}  // namespace

void ModelDims::validate() const {
  for (auto v : {noise_dim, context_dim, embedding_dim, text_hidden, canvas_channels, disc_channels,
                 num_classes, gen_width, disc_width}) {
    if (v < 1) throw std::invalid_argument("model dimensions must be positive");
  }
  if (!is_power_of_two(image_side) || image_side < 8) {
    throw std::invalid_argument("image_side must be a power of two >= 8");
  }
  for (auto grid : {canvas_grid, disc_grid}) {
    if (!is_power_of_two(grid) || grid < 4 || grid > image_side || image_side % grid != 0) {
      throw std::invalid_argument("K_g and K_d must be powers of two in [4, image_side]");
    }
  }
}

ModelDims ModelDims::full(std::int64_t num_classes) {
  ModelDims dims;
  dims.num_classes = num_classes;
  return dims;
}

ModelDims ModelDims::desk(std::int64_t num_classes) {
  ModelDims dims;
  dims.noise_dim = 100;
  dims.context_dim = 128;
  dims.embedding_dim = 300;
  dims.text_hidden = 64;
  dims.canvas_grid = 8;
  dims.canvas_channels = 32;
  dims.disc_grid = 8;
  dims.disc_channels = 64;
  dims.image_side = 64;
  dims.num_classes = num_classes;
  dims.gen_width = 16;
  dims.disc_width = 16;
  return dims;
}

std::string to_string(Fusion fusion) {
  switch (fusion) {
    case Fusion::kNone:
      return "none";
    case Fusion::kConcat:
      return "concat";
    case Fusion::kSubtract:
      return "subtract";
  }
  return "?";
}

Fusion fusion_from_string(const std::string& name) {
  if (name == "none") return Fusion::kNone;
  if (name == "concat") return Fusion::kConcat;
  if (name == "subtract") return Fusion::kSubtract;
  throw std::invalid_argument("unknown fusion: " + name);
}

const std::vector<std::string>& AblationConfig::names() {
  static const std::vector<std::string> kNames = {"baseline", "mismatch",   "g-prior",      "aux",
                                                  "d-concat", "d-subtract", "non-iterative"};
  return kNames;
}

AblationConfig AblationConfig::named(const std::string& name) {
  AblationConfig c;
  c.name = name;
  c.iterative = true;
  c.fusion = Fusion::kNone;
  c.wrong_instruction_loss = false;
  c.generator_prior = false;
  c.aux_loss = false;
  if (name == "baseline") return c;
  c.wrong_instruction_loss = true;
  if (name == "mismatch") return c;
  if (name == "non-iterative") {
    c.iterative = false;
    return c;
  }
  c.generator_prior = true;
  if (name == "g-prior") return c;
  c.aux_loss = true;
  if (name == "aux") return c;
  if (name == "d-concat") {
    c.fusion = Fusion::kConcat;
    return c;
  }
  if (name == "d-subtract") {
    c.fusion = Fusion::kSubtract;
    return c;
  }
  throw std::invalid_argument("unknown ablation: " + name);
}

CanvasEncoderImpl::CanvasEncoderImpl(const ModelDims& dims) : image_side_(dims.image_side) {
  const int steps = log2_exact(dims.image_side / dims.canvas_grid);
  body_ = torch::nn::Sequential();
  std::int64_t channels = std::max<std::int64_t>(16, dims.canvas_channels >> steps);
  body_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(3, channels, 3).padding(1)));
  body_->push_back(torch::nn::ReLU());
  for (int i = 0; i < steps; ++i) {
    const std::int64_t out = i + 1 == steps
                                 ? dims.canvas_channels
                                 : std::max<std::int64_t>(16, dims.canvas_channels >> (steps - 1 - i));
    body_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, out, 4).stride(2).padding(1)));
    if (i + 1 < steps) body_->push_back(torch::nn::ReLU());
    channels = out;
  }
  register_module("body", body_);
  norm_ = register_module("norm", torch::nn::BatchNorm2d(dims.canvas_channels));
}

torch::Tensor CanvasEncoderImpl::forward(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 4 && image.size(1) == 3 && image.size(2) == image_side_ &&
                  image.size(3) == image_side_,
              "canvas encoder expects Bx3x", image_side_, "x", image_side_, " input, got ",
              image.sizes());
  return norm_->forward(body_->forward(image));
}

GeneratorBlockImpl::GeneratorBlockImpl(std::int64_t in, std::int64_t out, std::int64_t condition_dim) {
  bn1_ = register_module("bn1", nn::ConditionalBatchNorm(in, condition_dim));
  conv1_ = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1)));
  bn2_ = register_module("bn2", nn::ConditionalBatchNorm(out, condition_dim));
  conv2_ = register_module("conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(out, out, 3).padding(1)));
  skip_ = register_module("skip", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1)));
}

torch::Tensor GeneratorBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& condition) {
  auto h = torch::relu(bn1_->forward(x, condition));
  h = conv1_->forward(upsample2(h));
  h = conv2_->forward(torch::relu(bn2_->forward(h, condition)));
  return h + skip_->forward(upsample2(x));
}

GeneratorImpl::GeneratorImpl(const ModelDims& dims, bool use_canvas_features)
    : dims_(dims), use_canvas_(use_canvas_features) {
  dims.validate();
  const int blocks = log2_exact(dims.image_side / 4);
  prior_stage_ = log2_exact(dims.canvas_grid / 4);
  seed_channels_ = gen_channels(dims, 4);
  seed_ = register_module("seed", torch::nn::Linear(dims.noise_dim + dims.context_dim,
                                                    seed_channels_ * 16));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  std::int64_t resolution = 4;
  for (int i = 0; i < blocks; ++i) {
    std::int64_t in = gen_channels(dims, resolution);
    if (i == prior_stage_ && use_canvas_) in += dims.canvas_channels;
    blocks_->push_back(GeneratorBlock(in, gen_channels(dims, 2 * resolution), dims.context_dim));
    resolution *= 2;
  }
  const std::int64_t attention_channels =
      gen_channels(dims, dims.canvas_grid) + (use_canvas_ ? dims.canvas_channels : 0);
  attention_ = register_module("attention", nn::SelfAttention(attention_channels, false));
  out_norm_ = register_module("out_norm",
                              nn::ConditionalBatchNorm(gen_channels(dims, dims.image_side), dims.context_dim));
  out_conv_ = register_module(
      "out_conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(gen_channels(dims, dims.image_side), 3, 3).padding(1)));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& noise, const torch::Tensor& condition,
                                     const torch::Tensor& context, const torch::Tensor& canvas_features) {
  TORCH_CHECK(noise.dim() == 2 && noise.size(1) == dims_.noise_dim, "noise must be Bx", dims_.noise_dim);
  TORCH_CHECK(condition.dim() == 2 && condition.size(1) == dims_.context_dim,
              "condition must be Bx", dims_.context_dim);
  TORCH_CHECK(context.dim() == 2 && context.size(1) == dims_.context_dim, "context must be Bx",
              dims_.context_dim);
  TORCH_CHECK(canvas_features.defined() == use_canvas_,
              use_canvas_ ? "generator expects canvas features" : "generator takes no canvas features");
  if (use_canvas_) {
    TORCH_CHECK(canvas_features.size(1) == dims_.canvas_channels &&
                    canvas_features.size(2) == dims_.canvas_grid &&
                    canvas_features.size(3) == dims_.canvas_grid,
                "canvas features must be Bx", dims_.canvas_channels, "x", dims_.canvas_grid, "x",
                dims_.canvas_grid);
  }
  auto x = seed_->forward(torch::cat({noise, condition}, 1)).reshape({noise.size(0), seed_channels_, 4, 4});
  for (std::size_t i = 0; i <= blocks_->size(); ++i) {
    if (static_cast<int>(i) == prior_stage_) {
      if (use_canvas_) x = torch::cat({x, canvas_features}, 1);
      x = attention_->forward(x);
    }
    if (i == blocks_->size()) break;
    x = blocks_[i]->as<GeneratorBlock>()->forward(x, context);
  }
  x = torch::relu(out_norm_->forward(x, context));
  return torch::tanh(out_conv_->forward(x));
}

DiscriminatorBlockImpl::DiscriminatorBlockImpl(std::int64_t in, std::int64_t out, bool downsample,
                                               bool preactivate)
    : downsample_(downsample), preactivate_(preactivate) {
  conv1_ = register_module("conv1", nn::SNConv2d(in, out, 3, 1, 1));
  conv2_ = register_module("conv2", nn::SNConv2d(out, out, 3, 1, 1));
  skip_ = register_module("skip", nn::SNConv2d(in, out, 1, 1, 0));
}

torch::Tensor DiscriminatorBlockImpl::forward(const torch::Tensor& x) {
  auto h = preactivate_ ? torch::relu(x) : x;
  h = conv2_->forward(torch::relu(conv1_->forward(h)));
  auto s = skip_->forward(x);
  if (downsample_) {
    h = avgpool2(h);
    s = avgpool2(s);
  }
  return h + s;
}

ImageEncoderImpl::ImageEncoderImpl(const ModelDims& dims) : image_side_(dims.image_side) {
  const int steps = log2_exact(dims.image_side / dims.disc_grid);
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  std::int64_t channels = 3;
  for (int i = 0; i < steps; ++i) {
    const std::int64_t out = i + 1 == steps ? dims.disc_channels
                                            : std::min(dims.disc_channels, dims.disc_width << i);
    blocks_->push_back(DiscriminatorBlock(channels, out, /*downsample=*/true, /*preactivate=*/i > 0));
    channels = out;
  }
  if (steps == 0) blocks_->push_back(DiscriminatorBlock(3, dims.disc_channels, false, false));
}

torch::Tensor ImageEncoderImpl::forward(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 4 && image.size(1) == 3 && image.size(2) == image_side_ &&
                  image.size(3) == image_side_,
              "image encoder expects Bx3x", image_side_, "x", image_side_, " input, got ",
              image.sizes());
  auto x = image;
  for (const auto& block : *blocks_) x = block->as<DiscriminatorBlock>()->forward(x);
  return x;
}

torch::Tensor fuse_features(const torch::Tensor& current, const torch::Tensor& previous, Fusion fusion) {
  switch (fusion) {
    case Fusion::kNone:
      return current;
    case Fusion::kSubtract:
      TORCH_CHECK(current.sizes() == previous.sizes(), "fusion shape mismatch");
      return current - previous;
    case Fusion::kConcat:
      TORCH_CHECK(current.sizes() == previous.sizes(), "fusion shape mismatch");
      return torch::cat({current, previous}, 1);
  }
  return current;
}

DiscriminatorImpl::DiscriminatorImpl(const ModelDims& dims, Fusion fusion) : fusion_(fusion) {
  dims.validate();
  encoder = register_module("encoder", ImageEncoder(dims));
  const std::int64_t fused = fusion == Fusion::kConcat ? 2 * dims.disc_channels : dims.disc_channels;
  const std::int64_t features = 2 * dims.disc_channels;
  attention_ = register_module("attention", nn::SelfAttention(fused, true));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  const int downs = log2_exact(dims.disc_grid / 4);
  std::int64_t channels = fused;
  for (int i = 0; i < downs; ++i) {
    blocks_->push_back(DiscriminatorBlock(channels, features, true, i > 0));
    channels = features;
  }
  blocks_->push_back(DiscriminatorBlock(channels, features, false, downs > 0));
  unconditional = register_module("unconditional", nn::SNLinear(features, 1));
  projection = register_module("projection", nn::SNLinear(dims.context_dim, features, false));
  aux_head = register_module("aux_head", nn::SNLinear(features, dims.num_classes));
}

torch::Tensor DiscriminatorImpl::fuse_pair(const torch::Tensor& current, const torch::Tensor& previous) {
  const auto current_features = encoder->forward(current);
  if (fusion_ == Fusion::kNone) return current_features;
  return fuse_features(current_features, encoder->forward(previous), fusion_);
}

torch::Tensor DiscriminatorImpl::pooled_features(const torch::Tensor& fused) {
  auto x = attention_->forward(fused);
  for (const auto& block : *blocks_) x = block->as<DiscriminatorBlock>()->forward(x);
  return torch::relu(x).sum({2, 3});
}

DiscriminatorOutput DiscriminatorImpl::discriminate(const torch::Tensor& fused, const torch::Tensor& context) {
  const auto phi = pooled_features(fused);
  TORCH_CHECK(context.dim() == 2 && context.size(0) == phi.size(0), "context batch mismatch");
  DiscriminatorOutput out;
  out.score = unconditional->forward(phi).squeeze(1) + (projection->forward(context) * phi).sum(1);
  out.aux_logits = aux_head->forward(phi);
  return out;
}

DiscriminatorOutput DiscriminatorImpl::forward(const torch::Tensor& current, const torch::Tensor& previous,
                                               const torch::Tensor& context) {
  return discriminate(fuse_pair(current, previous), context);
}

std::vector<DiscriminatorImpl::SpectralWeight> DiscriminatorImpl::spectral_weights() {
  std::vector<SpectralWeight> out;
  for (const auto& item : named_modules("", /*include_self=*/false)) {
    if (auto linear = std::dynamic_pointer_cast<nn::SNLinearImpl>(item.value())) {
      out.push_back({item.key(), linear->weight, linear->sn.ptr()});
    } else if (auto conv = std::dynamic_pointer_cast<nn::SNConv2dImpl>(item.value())) {
      out.push_back({item.key(), conv->weight, conv->sn.ptr()});
    }
  }
  return out;
}

}  // namespace iterdraw
