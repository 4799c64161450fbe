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

#ifndef ITERDRAW_TENSOR_CONVERT_HPP_
#define ITERDRAW_TENSOR_CONVERT_HPP_

#include <torch/torch.h>

#include <vector>

#include "iterdraw/types.hpp"

namespace iterdraw {

// ImageGrid (HWC) <-> float tensor (CHW), values unchanged.
torch::Tensor image_to_tensor(const ImageGrid& image);
torch::Tensor images_to_batch(const std::vector<const ImageGrid*>& images);
// Accepts CHW or 1xCHW; values are clamped into [-1, 1].
ImageGrid tensor_to_image(const torch::Tensor& chw);

}  // namespace iterdraw

#endif  // ITERDRAW_TENSOR_CONVERT_HPP_
