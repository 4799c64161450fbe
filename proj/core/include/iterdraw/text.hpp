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

#ifndef ITERDRAW_TEXT_HPP_
#define ITERDRAW_TEXT_HPP_

#include <torch/torch.h>

#include <cstdint>
#include <vector>

#include "iterdraw/embeddings.hpp"
#include "iterdraw/layers.hpp"

namespace iterdraw {

// Padded batch of token id lists.
struct TokenBatch {
  torch::Tensor ids;      // [B, L] int64, zero padded
  torch::Tensor lengths;  // [B] int64, all >= 1
};

// Throws std::invalid_argument if any list is empty.
TokenBatch make_token_batch(const std::vector<std::vector<std::int64_t>>& lists);

// Bidirectional LN-GRU over frozen word embeddings. The encoding is the
// concatenation of the final forward and backward states.
class InstructionEncoderImpl : public torch::nn::Module {
 public:
  InstructionEncoderImpl(const EmbeddingTable& table, std::int64_t hidden_per_direction);

  torch::Tensor forward(const TokenBatch& batch);
  torch::Tensor encode(const std::vector<std::int64_t>& ids);

  std::int64_t output_dim() const { return 2 * hidden_; }

 private:
  std::int64_t hidden_;
  torch::Tensor embeddings_;
  nn::LayerNormGRUCell forward_cell_{nullptr};
  nn::LayerNormGRUCell backward_cell_{nullptr};
};
TORCH_MODULE(InstructionEncoder);

// h_t = R(d_t, h_{t-1}); h_0 is all zeros.
class ContextRecurrenceImpl : public torch::nn::Module {
 public:
  ContextRecurrenceImpl(std::int64_t instruction_dim, std::int64_t context_dim);

  torch::Tensor forward(const torch::Tensor& instruction, const torch::Tensor& previous);
  torch::Tensor initial_state(std::int64_t batch) const;

  std::int64_t context_dim() const { return context_dim_; }

 private:
  std::int64_t context_dim_;
  nn::LayerNormGRUCell cell_{nullptr};
};
TORCH_MODULE(ContextRecurrence);

struct AugmentedCondition {
  torch::Tensor c_aug;
  torch::Tensor mu;
  torch::Tensor logvar;
};

// Samples the generator condition from N(mu(h), diag(exp(logvar(h)))).
class ConditioningAugmentationImpl : public torch::nn::Module {
 public:
  ConditioningAugmentationImpl(std::int64_t context_dim, std::int64_t condition_dim);

  AugmentedCondition forward(const torch::Tensor& context, const torch::Tensor& noise);

  // KL(N(mu, sigma) || N(0, I)), averaged over the batch.
  static torch::Tensor kl_divergence(const AugmentedCondition& condition);

  std::int64_t condition_dim() const { return condition_dim_; }

  torch::nn::Linear mu_map{nullptr};
  torch::nn::Linear logvar_map{nullptr};

 private:
  std::int64_t condition_dim_;
};
TORCH_MODULE(ConditioningAugmentation);

}  // namespace iterdraw

#endif  // ITERDRAW_TEXT_HPP_
