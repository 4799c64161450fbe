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

#include "iterdraw/text.hpp"

#include <algorithm>
#include <stdexcept>

namespace iterdraw {

TokenBatch make_token_batch(const std::vector<std::vector<std::int64_t>>& lists) {
  if (lists.empty()) throw std::invalid_argument("empty token batch");
  std::size_t longest = 0;
  for (const auto& ids : lists) {
    if (ids.empty()) throw std::invalid_argument("instruction has no tokens");
    longest = std::max(longest, ids.size());
  }
  TokenBatch batch;
  batch.ids = torch::zeros({static_cast<std::int64_t>(lists.size()), static_cast<std::int64_t>(longest)},
                           torch::kInt64);
  batch.lengths = torch::empty({static_cast<std::int64_t>(lists.size())}, torch::kInt64);
  auto ids = batch.ids.accessor<std::int64_t, 2>();
  auto lengths = batch.lengths.accessor<std::int64_t, 1>();
  for (std::size_t b = 0; b < lists.size(); ++b) {
    lengths[static_cast<std::int64_t>(b)] = static_cast<std::int64_t>(lists[b].size());
    for (std::size_t i = 0; i < lists[b].size(); ++i) {
      ids[static_cast<std::int64_t>(b)][static_cast<std::int64_t>(i)] = lists[b][i];
    }
  }
  return batch;
}

InstructionEncoderImpl::InstructionEncoderImpl(const EmbeddingTable& table,
                                               std::int64_t hidden_per_direction)
    : hidden_(hidden_per_direction) {
  embeddings_ = register_buffer(
      "embeddings", torch::from_blob(const_cast<float*>(table.data().data()),
                                     {static_cast<std::int64_t>(table.rows()), table.dim()},
                                     torch::kFloat32)
                        .clone());
  forward_cell_ = register_module("forward_cell", nn::LayerNormGRUCell(table.dim(), hidden_));
  backward_cell_ = register_module("backward_cell", nn::LayerNormGRUCell(table.dim(), hidden_));
}

torch::Tensor InstructionEncoderImpl::forward(const TokenBatch& batch) {
  const auto batch_size = batch.ids.size(0);
  const auto steps = batch.ids.size(1);
  TORCH_CHECK(steps > 0, "empty instruction");
  TORCH_CHECK(batch.lengths.min().item<std::int64_t>() >= 1, "empty instruction");
  const auto embedded = embeddings_.index_select(0, batch.ids.reshape({-1}))
                            .reshape({batch_size, steps, embeddings_.size(1)});
  const auto positions = torch::arange(steps, torch::kInt64).unsqueeze(0);
  const auto mask = (positions < batch.lengths.unsqueeze(1)).to(torch::kFloat32).unsqueeze(-1);

  auto forward_state = torch::zeros({batch_size, hidden_});
  for (std::int64_t t = 0; t < steps; ++t) {
    const auto m = mask.select(1, t);
    const auto next = forward_cell_->forward(embedded.select(1, t), forward_state);
    forward_state = m * next + (1 - m) * forward_state;
  }
  // Padding sits at the end, so the reverse pass stays at zero until it
  // reaches each sequence's last real token.
  auto backward_state = torch::zeros({batch_size, hidden_});
  for (std::int64_t t = steps - 1; t >= 0; --t) {
    const auto m = mask.select(1, t);
    const auto next = backward_cell_->forward(embedded.select(1, t), backward_state);
    backward_state = m * next + (1 - m) * backward_state;
  }
  return torch::cat({forward_state, backward_state}, 1);
}

torch::Tensor InstructionEncoderImpl::encode(const std::vector<std::int64_t>& ids) {
  return forward(make_token_batch({ids})).squeeze(0);
}

ContextRecurrenceImpl::ContextRecurrenceImpl(std::int64_t instruction_dim, std::int64_t context_dim)
    : context_dim_(context_dim) {
  cell_ = register_module("cell", nn::LayerNormGRUCell(instruction_dim, context_dim));
}

torch::Tensor ContextRecurrenceImpl::forward(const torch::Tensor& instruction,
                                             const torch::Tensor& previous) {
  return cell_->forward(instruction, previous);
}

torch::Tensor ContextRecurrenceImpl::initial_state(std::int64_t batch) const {
  return torch::zeros({batch, context_dim_});
}

ConditioningAugmentationImpl::ConditioningAugmentationImpl(std::int64_t context_dim,
                                                           std::int64_t condition_dim)
    : condition_dim_(condition_dim) {
  mu_map = register_module("mu", torch::nn::Linear(context_dim, condition_dim));
  logvar_map = register_module("logvar", torch::nn::Linear(context_dim, condition_dim));
}

AugmentedCondition ConditioningAugmentationImpl::forward(const torch::Tensor& context,
                                                         const torch::Tensor& noise) {
  TORCH_CHECK(noise.size(-1) == condition_dim_, "noise dimension mismatch");
  AugmentedCondition out;
  out.mu = mu_map->forward(context);
  out.logvar = logvar_map->forward(context);
  out.c_aug = out.mu + torch::exp(out.logvar * 0.5) * noise;
  return out;
}

torch::Tensor ConditioningAugmentationImpl::kl_divergence(const AugmentedCondition& condition) {
  const auto per_dim = 0.5 * (condition.mu.pow(2) + condition.logvar.exp() - 1 - condition.logvar);
  return per_dim.sum(-1).mean();
}

}  // namespace iterdraw
