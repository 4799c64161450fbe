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

#ifndef ITERDRAW_LOSSES_HPP_
#define ITERDRAW_LOSSES_HPP_

#include <torch/torch.h>

#include <functional>

namespace iterdraw::losses {

inline constexpr double kProbabilityClamp = 1e-7;

// Discriminator hinge objective:
//   mean(-min(0, -1 + s_real)) + 1/2 (mean(-min(0, -1 - s_fake)) + mean(-min(0, -1 - s_wrong)))
// Without a wrong-instruction batch (undefined tensor) the objective is
//   mean(-min(0, -1 + s_real)) + mean(-min(0, -1 - s_fake)).
torch::Tensor d_hinge_loss(const torch::Tensor& score_real, const torch::Tensor& score_fake,
                           const torch::Tensor& score_wrong);

// -mean(s_fake) + beta * aux.
torch::Tensor g_hinge_loss(const torch::Tensor& score_fake, const torch::Tensor& aux_loss,
                           double beta = 20.0);

// Per-example sum over classes of binary cross entropy, averaged over the
// batch. Probabilities are clamped to [1e-7, 1 - 1e-7]. A 1-D input is one
// example.
torch::Tensor aux_bce(const torch::Tensor& targets, const torch::Tensor& probs);

// (gamma / 2) * mean over the batch of ||d D(x) / d x||^2, evaluated on
// `real`. The result stays differentiable with respect to D's parameters.
torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& discriminator,
                               const torch::Tensor& real, double gamma = 10.0);

}  // namespace iterdraw::losses

#endif  // ITERDRAW_LOSSES_HPP_
