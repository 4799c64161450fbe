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

#ifndef ITERDRAW_GAN_HPP_
#define ITERDRAW_GAN_HPP_

#include <torch/torch.h>

#include <string>
#include <vector>

#include "iterdraw/layers.hpp"

namespace iterdraw {

struct ModelDims {
  std::int64_t noise_dim = 100;        // N_z
  std::int64_t context_dim = 1024;     // N_c, also the augmented condition size
  std::int64_t embedding_dim = 300;
  std::int64_t text_hidden = 512;      // per direction; instruction encoding is 2x
  std::int64_t canvas_grid = 16;       // K_g
  std::int64_t canvas_channels = 128;  // N_g
  std::int64_t disc_grid = 16;         // K_d
  std::int64_t disc_channels = 256;    // N_d
  std::int64_t image_side = 128;
  std::int64_t num_classes = 24;
  std::int64_t gen_width = 32;         // generator channels at full resolution
  std::int64_t disc_width = 32;        // E_D channels at full resolution

  // Throws std::invalid_argument when the grids do not divide the image
  // side by a power of two or a size is non-positive.
  void validate() const;

  // Paper-scale dimensions.
  static ModelDims full(std::int64_t num_classes);
  // 64x64 desk configuration with K_g = K_d = 8 and narrow layers.
  static ModelDims desk(std::int64_t num_classes);

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

enum class Fusion { kNone, kConcat, kSubtract };

std::string to_string(Fusion fusion);
Fusion fusion_from_string(const std::string& name);

// One row of the ablation lattice.
struct AblationConfig {
  std::string name = "d-subtract";
  bool wrong_instruction_loss = true;
  bool generator_prior = true;
  bool aux_loss = true;
  Fusion fusion = Fusion::kSubtract;
  bool iterative = true;

  static AblationConfig named(const std::string& name);
  static const std::vector<std::string>& names();

  friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

// E_G: shallow CNN from the previous canvas to K_g x K_g x N_g features,
// batch-normalized at the output.
class CanvasEncoderImpl : public torch::nn::Module {
 public:
  explicit CanvasEncoderImpl(const ModelDims& dims);
  torch::Tensor forward(const torch::Tensor& image);

 private:
  std::int64_t image_side_;
  torch::nn::Sequential body_{nullptr};
  torch::nn::BatchNorm2d norm_{nullptr};
};
TORCH_MODULE(CanvasEncoder);

class GeneratorBlockImpl : public torch::nn::Module {
 public:
  GeneratorBlockImpl(std::int64_t in, std::int64_t out, std::int64_t condition_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& condition);

 private:
  nn::ConditionalBatchNorm bn1_{nullptr}, bn2_{nullptr};
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, skip_{nullptr};
};
TORCH_MODULE(GeneratorBlock);

// G(z, c_aug, h, f_prev): residual up-sampling from 4x4 to the image side,
// conditional batch norm driven by h, canvas features concatenated and
// self-attention applied at the K_g resolution, tanh output.
class GeneratorImpl : public torch::nn::Module {
 public:
  GeneratorImpl(const ModelDims& dims, bool use_canvas_features);

  // `canvas_features` must be undefined when the prior is disabled.
  torch::Tensor forward(const torch::Tensor& noise, const torch::Tensor& condition,
                        const torch::Tensor& context, const torch::Tensor& canvas_features);

  bool uses_canvas_features() const { return use_canvas_; }

 private:
  ModelDims dims_;
  bool use_canvas_;
  std::int64_t seed_channels_;
  int prior_stage_;  // number of blocks applied before the K_g resolution
  torch::nn::Linear seed_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  nn::SelfAttention attention_{nullptr};
  nn::ConditionalBatchNorm out_norm_{nullptr};
  torch::nn::Conv2d out_conv_{nullptr};
};
TORCH_MODULE(Generator);

class DiscriminatorBlockImpl : public torch::nn::Module {
 public:
  DiscriminatorBlockImpl(std::int64_t in, std::int64_t out, bool downsample, bool preactivate);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  bool downsample_;
  bool preactivate_;
  nn::SNConv2d conv1_{nullptr}, conv2_{nullptr}, skip_{nullptr};
};
TORCH_MODULE(DiscriminatorBlock);

// E_D: spectrally normalized residual down-sampling to K_d x K_d x N_d.
class ImageEncoderImpl : public torch::nn::Module {
 public:
  explicit ImageEncoderImpl(const ModelDims& dims);
  torch::Tensor forward(const torch::Tensor& image);

 private:
  std::int64_t image_side_;
  torch::nn::ModuleList blocks_{nullptr};
};
TORCH_MODULE(ImageEncoder);

struct DiscriminatorOutput {
  torch::Tensor score;       // [B]
  torch::Tensor aux_logits;  // [B, num_classes]
};

// Combines E_D(x_t) with E_D(x_prev). kNone ignores `previous`.
torch::Tensor fuse_features(const torch::Tensor& current, const torch::Tensor& previous, Fusion fusion);

// Projection discriminator over fused E_D features:
//   score = w . phi + b + (V h) . phi,  aux_logits = A phi,
// phi = global sum of the last residual block.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(const ModelDims& dims, Fusion fusion);

  torch::Tensor fuse_pair(const torch::Tensor& current, const torch::Tensor& previous);
  DiscriminatorOutput discriminate(const torch::Tensor& fused, const torch::Tensor& context);
  DiscriminatorOutput forward(const torch::Tensor& current, const torch::Tensor& previous,
                              const torch::Tensor& context);

  torch::Tensor pooled_features(const torch::Tensor& fused);

  struct SpectralWeight {
    std::string name;
    torch::Tensor weight;
    std::shared_ptr<nn::SpectralNormImpl> norm;
  };
  // Every spectrally normalized weight, including the encoder's.
  std::vector<SpectralWeight> spectral_weights();

  ImageEncoder encoder{nullptr};
  nn::SNLinear unconditional{nullptr};
  nn::SNLinear projection{nullptr};
  nn::SNLinear aux_head{nullptr};

  Fusion fusion() const { return fusion_; }

 private:
  Fusion fusion_;
  nn::SelfAttention attention_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
};
TORCH_MODULE(Discriminator);

}  // namespace iterdraw

#endif  // ITERDRAW_GAN_HPP_
