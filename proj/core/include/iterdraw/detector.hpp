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

#ifndef ITERDRAW_DETECTOR_HPP_
#define ITERDRAW_DETECTOR_HPP_

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "iterdraw/types.hpp"

namespace iterdraw {

struct DetectorConfig {
  int input_side = 64;
  int width = 16;
  int epochs = 12;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  // Invoked once per epoch with the mean training loss.
  std::function<void(int, double)> on_epoch;
};

struct DetectorExample {
  ImageGrid image;
  std::vector<ObjectSpec> scene;
};

// Training targets for one example: presence [N] and centroids [N, 2]
// normalized to [0, 1] (zero for absent classes).
struct DetectorTargets {
  torch::Tensor presence;
  torch::Tensor centroids;
};
DetectorTargets detector_targets(const std::vector<ObjectSpec>& scene, int num_classes, int canvas_side);

// BCE on presence logits, mean over classes and batch.
torch::Tensor detection_loss(const torch::Tensor& logits, const torch::Tensor& presence);
// Squared centroid error counted only for classes present in the target,
// averaged over present entries.
torch::Tensor masked_localization_loss(const torch::Tensor& predicted, const torch::Tensor& target,
                                       const torch::Tensor& presence);

struct DetectorOutput {
  torch::Tensor logits;     // [B, N]
  torch::Tensor centroids;  // [B, N, 2] in [0, 1]
};

// Convolutional backbone at 1/4 input resolution. Both heads are per-class
// linear maps applied at every location: presence takes the spatial max of
// its map, localization the soft-argmax of its map.
class DetectorNetImpl : public torch::nn::Module {
 public:
  DetectorNetImpl(int num_classes, int input_side, int width);
  DetectorOutput forward(const torch::Tensor& images);

 private:
  int num_classes_;
  torch::nn::Sequential backbone{nullptr};
  torch::nn::Conv2d presence_head{nullptr};
  torch::nn::Conv2d location_head{nullptr};
};
TORCH_MODULE(DetectorNet);

class DetectorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Detector {
 public:
  Detector(int num_classes, const DetectorConfig& config);

  int num_classes() const { return num_classes_; }
  const DetectorConfig& config() const { return config_; }
  DetectorNet& net() { return net_; }

  // Images of any square size; centroids are reported in each image's own
  // pixel coordinates. Order follows the input.
  std::vector<DetectionSet> detect(const std::vector<ImageGrid>& images);
  DetectionSet detect(const ImageGrid& image);

  void save(const std::filesystem::path& path);
  static std::unique_ptr<Detector> load(const std::filesystem::path& path);

 private:
  torch::Tensor prepare(const std::vector<ImageGrid>& images) const;

  int num_classes_;
  DetectorConfig config_;
  DetectorNet net_{nullptr};
};

std::unique_ptr<Detector> train_detector(const std::vector<DetectorExample>& examples, int num_classes,
                                         const DetectorConfig& config);

// Every turn image and every background of the dataset as detector examples.
std::vector<DetectorExample> detector_examples(const std::vector<SceneSequence>& sequences,
                                               bool include_backgrounds = true);

// Presence 1 and exact centroids for every annotated object.
DetectionSet oracle_detect(const std::vector<ObjectSpec>& scene);

}  // namespace iterdraw

#endif  // ITERDRAW_DETECTOR_HPP_
