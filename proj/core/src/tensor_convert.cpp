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

#include "iterdraw/tensor_convert.hpp"

#include <algorithm>

namespace iterdraw {

torch::Tensor image_to_tensor(const ImageGrid& image) {
  auto hwc = torch::from_blob(const_cast<float*>(image.values().data()),
                              {image.height(), image.width(), ImageGrid::kChannels},
                              torch::kFloat32);
  return hwc.permute({2, 0, 1}).contiguous();
}

torch::Tensor images_to_batch(const std::vector<const ImageGrid*>& images) {
  std::vector<torch::Tensor> items;
  items.reserve(images.size());
  for (const auto* image : images) items.push_back(image_to_tensor(*image));
  return torch::stack(items);
}

ImageGrid tensor_to_image(const torch::Tensor& chw) {
  auto t = chw.detach().to(torch::kCPU, torch::kFloat32);
  if (t.dim() == 4) t = t.squeeze(0);
  TORCH_CHECK(t.dim() == 3 && t.size(0) == ImageGrid::kChannels, "expected a 3xHxW tensor");
  t = t.clamp(-1.0, 1.0).permute({1, 2, 0}).contiguous();
  ImageGrid image(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)));
  std::copy(t.data_ptr<float>(), t.data_ptr<float>() + t.numel(), image.values().begin());
  return image;
}

}  // namespace iterdraw
