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

#include "iterdraw/losses.hpp"

namespace iterdraw::losses {

namespace {

torch::Tensor hinge(const torch::Tensor& margin) { return -torch::clamp_max(margin, 0.0); }

}  // namespace

torch::Tensor d_hinge_loss(const torch::Tensor& score_real, const torch::Tensor& score_fake,
                           const torch::Tensor& score_wrong) {
  const auto real = hinge(score_real - 1.0).mean();
  const auto fake = hinge(-1.0 - score_fake).mean();
  if (!score_wrong.defined()) return real + fake;
  const auto wrong = hinge(-1.0 - score_wrong).mean();
  return real + 0.5 * (fake + wrong);
}

torch::Tensor g_hinge_loss(const torch::Tensor& score_fake, const torch::Tensor& aux_loss, double beta) {
  auto loss = -score_fake.mean();
  if (aux_loss.defined()) loss = loss + beta * aux_loss;
  return loss;
}

torch::Tensor aux_bce(const torch::Tensor& targets, const torch::Tensor& probs) {
  const auto p = probs.clamp(kProbabilityClamp, 1.0 - kProbabilityClamp);
  const auto per_class = -(targets * torch::log(p) + (1 - targets) * torch::log(1 - p));
  if (per_class.dim() <= 1) return per_class.sum();
  return per_class.sum(-1).mean();
}

torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& discriminator,
                               const torch::Tensor& real, double gamma) {
  auto x = real.detach().requires_grad_(true);
  const auto scores = discriminator(x);
  if (!scores.requires_grad()) return torch::zeros({}, real.options());
  const auto gradients = torch::autograd::grad({scores.sum()}, {x}, /*grad_outputs=*/{},
                                               /*retain_graph=*/true, /*create_graph=*/true,
                                               /*allow_unused=*/true)[0];
  if (!gradients.defined()) return torch::zeros({}, real.options());
  const auto squared_norm = gradients.pow(2).reshape({x.size(0), -1}).sum(1);
  return 0.5 * gamma * squared_norm.mean();
}

}  // namespace iterdraw::losses
