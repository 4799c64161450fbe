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

#include "iterdraw/layers.hpp"

#include <cmath>

namespace iterdraw::nn {

namespace F = torch::nn::functional;

namespace {

torch::Tensor l2_normalize(const torch::Tensor& x) {
  return F::normalize(x, F::NormalizeFuncOptions().dim(0).eps(1e-12));
}

}  // namespace

SpectralNormImpl::SpectralNormImpl(std::int64_t rows, std::int64_t /*cols*/, int power_iterations)
    : power_iterations_(power_iterations) {
  u_ = register_buffer("u", l2_normalize(torch::randn({rows})));
}

void SpectralNormImpl::power_iterate(const torch::Tensor& weight, int iterations) {
  torch::NoGradGuard no_grad;
  const auto matrix = weight.detach().reshape({weight.size(0), -1});
  auto u = u_.clone();
  for (int i = 0; i < iterations; ++i) {
    const auto v = l2_normalize(torch::mv(matrix.t(), u));
    u = l2_normalize(torch::mv(matrix, v));
  }
  u_.copy_(u);
}

torch::Tensor SpectralNormImpl::normalize(const torch::Tensor& weight) {
  if (is_training() && power_iterations_ > 0) power_iterate(weight, power_iterations_);
  const auto matrix = weight.reshape({weight.size(0), -1});
  torch::Tensor u;
  torch::Tensor v;
  {
    torch::NoGradGuard no_grad;
    u = u_.clone();
    v = l2_normalize(torch::mv(matrix.detach().t(), u));
  }
  const auto sigma = torch::dot(u, torch::mv(matrix, v));
  return weight / sigma;
}

SNLinearImpl::SNLinearImpl(std::int64_t in, std::int64_t out, bool use_bias) {
  torch::nn::Linear init(torch::nn::LinearOptions(in, out).bias(use_bias));
  weight = register_parameter("weight", init->weight.detach().clone());
  if (use_bias) bias = register_parameter("bias", init->bias.detach().clone());
  sn = register_module("sn", SpectralNorm(out, in));
}

torch::Tensor SNLinearImpl::normalized_weight() { return sn->normalize(weight); }

torch::Tensor SNLinearImpl::forward(const torch::Tensor& x) {
  return F::linear(x, normalized_weight(), bias.defined() ? bias : torch::Tensor());
}

SNConv2dImpl::SNConv2dImpl(std::int64_t in, std::int64_t out, std::int64_t kernel,
                           std::int64_t stride, std::int64_t padding, bool use_bias)
    : stride_(stride), padding_(padding) {
  torch::nn::Conv2d init(torch::nn::Conv2dOptions(in, out, kernel).bias(use_bias));
  weight = register_parameter("weight", init->weight.detach().clone());
  if (use_bias) bias = register_parameter("bias", init->bias.detach().clone());
  sn = register_module("sn", SpectralNorm(out, in * kernel * kernel));
}

torch::Tensor SNConv2dImpl::normalized_weight() { return sn->normalize(weight); }

torch::Tensor SNConv2dImpl::forward(const torch::Tensor& x) {
  return F::conv2d(x, normalized_weight(),
                   F::Conv2dFuncOptions()
                       .bias(bias.defined() ? bias : torch::Tensor())
                       .stride(stride_)
                       .padding(padding_));
}

ConditionalBatchNormImpl::ConditionalBatchNormImpl(std::int64_t channels,
                                                   std::int64_t condition_dim) {
  norm = register_module("norm", torch::nn::BatchNorm2d(
                                     torch::nn::BatchNormOptions(channels).affine(false)));
  gain = register_module("gain", torch::nn::Linear(condition_dim, channels));
  shift = register_module("shift", torch::nn::Linear(condition_dim, channels));
  torch::NoGradGuard no_grad;
  torch::nn::init::normal_(gain->weight, 0.0, 0.02);
  torch::nn::init::ones_(gain->bias);
  torch::nn::init::normal_(shift->weight, 0.0, 0.02);
  torch::nn::init::zeros_(shift->bias);
}

torch::Tensor ConditionalBatchNormImpl::forward(const torch::Tensor& x,
                                                const torch::Tensor& condition) {
  const auto normalized = norm->forward(x);
  const auto g = gain->forward(condition).unsqueeze(-1).unsqueeze(-1);
  const auto b = shift->forward(condition).unsqueeze(-1).unsqueeze(-1);
  return normalized * g + b;
}

SelfAttentionImpl::SelfAttentionImpl(std::int64_t channels, bool spectral) : spectral_(spectral) {
  const std::int64_t inner = std::max<std::int64_t>(1, channels / 8);
  if (spectral) {
    sn_query_ = register_module("query", SNConv2d(channels, inner, 1, 1, 0, false));
    sn_key_ = register_module("key", SNConv2d(channels, inner, 1, 1, 0, false));
    sn_value_ = register_module("value", SNConv2d(channels, channels, 1, 1, 0, false));
  } else {
    auto options = [](std::int64_t in, std::int64_t out) {
      return torch::nn::Conv2dOptions(in, out, 1).bias(false);
    };
    query_ = register_module("query", torch::nn::Conv2d(options(channels, inner)));
    key_ = register_module("key", torch::nn::Conv2d(options(channels, inner)));
    value_ = register_module("value", torch::nn::Conv2d(options(channels, channels)));
  }
  scale = register_parameter("scale", torch::zeros({1}));
}

torch::Tensor SelfAttentionImpl::project(int which, const torch::Tensor& x) {
  if (spectral_) {
    return which == 0 ? sn_query_->forward(x) : which == 1 ? sn_key_->forward(x) : sn_value_->forward(x);
  }
  return which == 0 ? query_->forward(x) : which == 1 ? key_->forward(x) : value_->forward(x);
}

torch::Tensor SelfAttentionImpl::forward(const torch::Tensor& x) {
  const auto batch = x.size(0);
  const auto channels = x.size(1);
  const auto positions = x.size(2) * x.size(3);
  const auto q = project(0, x).reshape({batch, -1, positions});
  const auto k = project(1, x).reshape({batch, -1, positions});
  const auto v = project(2, x).reshape({batch, channels, positions});
  const auto attention = torch::softmax(torch::bmm(q.transpose(1, 2), k), -1);
  const auto attended = torch::bmm(v, attention.transpose(1, 2)).reshape(x.sizes());
  return x + scale * attended;
}

LayerNormGRUCellImpl::LayerNormGRUCellImpl(std::int64_t input_dim, std::int64_t hidden_dim)
    : hidden_dim_(hidden_dim) {
  input_proj_ = register_module("input_proj", torch::nn::Linear(input_dim, 3 * hidden_dim));
  hidden_proj_ = register_module(
      "hidden_proj", torch::nn::Linear(torch::nn::LinearOptions(hidden_dim, 3 * hidden_dim).bias(false)));
  input_norm_ = register_module("input_norm", torch::nn::LayerNorm(
                                                  torch::nn::LayerNormOptions({3 * hidden_dim})));
  hidden_norm_ = register_module("hidden_norm", torch::nn::LayerNorm(
                                                    torch::nn::LayerNormOptions({3 * hidden_dim})));
}

torch::Tensor LayerNormGRUCellImpl::forward(const torch::Tensor& x, const torch::Tensor& h) {
  const auto gi = input_norm_->forward(input_proj_->forward(x)).chunk(3, -1);
  const auto gh = hidden_norm_->forward(hidden_proj_->forward(h)).chunk(3, -1);
  const auto reset = torch::sigmoid(gi[0] + gh[0]);
  const auto update = torch::sigmoid(gi[1] + gh[1]);
  const auto candidate = torch::tanh(gi[2] + reset * gh[2]);
  return (1 - update) * candidate + update * h;
}

}  // namespace iterdraw::nn
