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

#ifndef ITERDRAW_LAYERS_HPP_
#define ITERDRAW_LAYERS_HPP_

#include <torch/torch.h>

namespace iterdraw::nn {

// Divides `weight` (reshaped to rows x cols) by its top singular value,
// estimated with power iteration on the left vector `u`. The estimate is
// refined only in training mode, so evaluation is read-only.
class SpectralNormImpl : public torch::nn::Module {
 public:
  SpectralNormImpl(std::int64_t rows, std::int64_t cols, int power_iterations = 1);

  // Runs `iterations` power steps on `weight` and updates the stored u.
  void power_iterate(const torch::Tensor& weight, int iterations);
  // weight / sigma with sigma = u^T W v, u and v treated as constants.
  torch::Tensor normalize(const torch::Tensor& weight);

  const torch::Tensor& u() const { return u_; }

 private:
  torch::Tensor u_;
  int power_iterations_;
};
TORCH_MODULE(SpectralNorm);

class SNLinearImpl : public torch::nn::Module {
 public:
  SNLinearImpl(std::int64_t in, std::int64_t out, bool bias = true);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor normalized_weight();

  torch::Tensor weight;
  torch::Tensor bias;
  SpectralNorm sn{nullptr};
};
TORCH_MODULE(SNLinear);

class SNConv2dImpl : public torch::nn::Module {
 public:
  SNConv2dImpl(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride = 1,
               std::int64_t padding = 0, bool bias = true);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor normalized_weight();

  torch::Tensor weight;
  torch::Tensor bias;
  SpectralNorm sn{nullptr};

 private:
  std::int64_t stride_;
  std::int64_t padding_;
};
TORCH_MODULE(SNConv2d);

// Batch norm without its own affine parameters; the per-channel gain and
// bias are linear functions of a condition vector.
class ConditionalBatchNormImpl : public torch::nn::Module {
 public:
  ConditionalBatchNormImpl(std::int64_t channels, std::int64_t condition_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& condition);

  torch::nn::BatchNorm2d norm{nullptr};
  torch::nn::Linear gain{nullptr};
  torch::nn::Linear shift{nullptr};
};
TORCH_MODULE(ConditionalBatchNorm);

// Non-local attention over all spatial positions. The output scale starts
// at zero, so a fresh layer is the identity.
class SelfAttentionImpl : public torch::nn::Module {
 public:
  SelfAttentionImpl(std::int64_t channels, bool spectral);
  torch::Tensor forward(const torch::Tensor& x);

  torch::Tensor scale;

 private:
  torch::Tensor project(int which, const torch::Tensor& x);

  bool spectral_;
  torch::nn::Conv2d query_{nullptr}, key_{nullptr}, value_{nullptr};
  SNConv2d sn_query_{nullptr}, sn_key_{nullptr}, sn_value_{nullptr};
};
TORCH_MODULE(SelfAttention);

// Single recurrent step with layer normalization on both projections.
class LayerNormGRUCellImpl : public torch::nn::Module {
 public:
  LayerNormGRUCellImpl(std::int64_t input_dim, std::int64_t hidden_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& h);

  std::int64_t hidden_dim() const { return hidden_dim_; }

 private:
  std::int64_t hidden_dim_;
  torch::nn::Linear input_proj_{nullptr};
  torch::nn::Linear hidden_proj_{nullptr};
  torch::nn::LayerNorm input_norm_{nullptr};
  torch::nn::LayerNorm hidden_norm_{nullptr};
};
TORCH_MODULE(LayerNormGRUCell);

}  // namespace iterdraw::nn

#endif  // ITERDRAW_LAYERS_HPP_
