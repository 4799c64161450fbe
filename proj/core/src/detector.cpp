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

#include "iterdraw/detector.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "iterdraw/image_io.hpp"
#include "iterdraw/tensor_convert.hpp"
#include "json.hpp"

namespace iterdraw {

using json = nlohmann::json;

DetectorTargets detector_targets(const std::vector<ObjectSpec>& scene, int num_classes, int canvas_side) {
  DetectorTargets out{torch::zeros({num_classes}), torch::zeros({num_classes, 2})};
  for (const auto& object : scene) {
    if (object.class_id < 0 || object.class_id >= num_classes) {
      throw std::invalid_argument("class id outside the detector's class range");
    }
    out.presence[object.class_id] = 1.0f;
    out.centroids[object.class_id][0] = object.centroid.x / static_cast<float>(canvas_side);
    out.centroids[object.class_id][1] = object.centroid.y / static_cast<float>(canvas_side);
  }
  return out;
}

torch::Tensor detection_loss(const torch::Tensor& logits, const torch::Tensor& presence) {
  return torch::binary_cross_entropy_with_logits(logits, presence);
}

torch::Tensor masked_localization_loss(const torch::Tensor& predicted, const torch::Tensor& target,
                                       const torch::Tensor& presence) {
  const auto mask = presence.unsqueeze(-1);
  const auto squared = ((predicted - target).pow(2) * mask).sum();
  return squared / torch::clamp_min(presence.sum(), 1.0);
}

DetectorNetImpl::DetectorNetImpl(int num_classes, int input_side, int width) : num_classes_(num_classes) {
  if (input_side < 16 || input_side % 4 != 0) {
    throw std::invalid_argument("detector input side must be a multiple of 4 and at least 16");
  }
  backbone = torch::nn::Sequential();
  auto block = [&](int in, int out, int stride) {
    backbone->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1)));
    backbone->push_back(torch::nn::BatchNorm2d(out));
    backbone->push_back(torch::nn::ReLU());
  };
  block(3, width, 1);
  block(width, 2 * width, 2);
  block(2 * width, 2 * width, 1);
  block(2 * width, 4 * width, 2);
  block(4 * width, 4 * width, 1);
  block(4 * width, 4 * width, 1);
  register_module("backbone", backbone);
  presence_head = register_module("presence_head", torch::nn::Conv2d(torch::nn::Conv2dOptions(4 * width, num_classes, 1)));
  location_head = register_module("location_head", torch::nn::Conv2d(torch::nn::Conv2dOptions(4 * width, num_classes, 1)));
}

DetectorOutput DetectorNetImpl::forward(const torch::Tensor& images) {
  const auto features = backbone->forward(images);
  const auto batch = features.size(0);
  const auto h = features.size(2);
  const auto w = features.size(3);
  const auto logits = std::get<0>(presence_head->forward(features).flatten(2).max(2));
  const auto weights = torch::softmax(location_head->forward(features).flatten(2), 2).view({batch, num_classes_, h, w});
  const auto xs = (torch::arange(w, features.options()) + 0.5) / static_cast<double>(w);
  const auto ys = (torch::arange(h, features.options()) + 0.5) / static_cast<double>(h);
  const auto cx = (weights.sum(2) * xs).sum(2);
  const auto cy = (weights.sum(3) * ys).sum(2);
  return {logits, torch::stack({cx, cy}, 2)};
}

Detector::Detector(int num_classes, const DetectorConfig& config)
    : num_classes_(num_classes), config_(config) {
  if (num_classes < 1) throw std::invalid_argument("detector needs at least one class");
  net_ = DetectorNet(num_classes, config.input_side, config.width);
}

torch::Tensor Detector::prepare(const std::vector<ImageGrid>& images) const {
  std::vector<torch::Tensor> tensors;
  tensors.reserve(images.size());
  for (const auto& image : images) {
    const auto& sized = (image.height() == config_.input_side && image.width() == config_.input_side)
                            ? image
                            : resize_image(image, config_.input_side, config_.input_side);
    tensors.push_back(image_to_tensor(sized));
  }
  return torch::stack(tensors);
}

std::vector<DetectionSet> Detector::detect(const std::vector<ImageGrid>& images) {
  std::vector<DetectionSet> out;
  if (images.empty()) return out;
  torch::NoGradGuard no_grad;
  net_->eval();
  const auto result = net_->forward(prepare(images));
  const auto probabilities = torch::sigmoid(result.logits).contiguous();
  const auto centroids = result.centroids.contiguous();
  auto p = probabilities.accessor<float, 2>();
  auto c = centroids.accessor<float, 3>();
  for (std::size_t i = 0; i < images.size(); ++i) {
    DetectionSet set;
    set.threshold = static_cast<float>(config_.threshold);
    const auto index = static_cast<std::int64_t>(i);
    for (int k = 0; k < num_classes_; ++k) {
      set.presence[k] = p[index][k];
      if (p[index][k] > set.threshold) {
        set.centroids[k] = Point2{c[index][k][0] * static_cast<float>(images[i].width()),
                                  c[index][k][1] * static_cast<float>(images[i].height())};
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

DetectionSet Detector::detect(const ImageGrid& image) { return detect(std::vector<ImageGrid>{image}).front(); }

void Detector::save(const std::filesystem::path& path) {
  torch::serialize::OutputArchive archive;
  const json meta = {{"format", "iterdraw-detector"},
                     {"num_classes", num_classes_},
                     {"input_side", config_.input_side},
                     {"width", config_.width},
                     {"threshold", config_.threshold}};
  archive.write("meta", c10::IValue(meta.dump()));
  torch::serialize::OutputArchive sub;
  net_->save(sub);
  archive.write("net", sub);
  archive.save_to(path.string());
}

std::unique_ptr<Detector> Detector::load(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const std::exception& e) {
    throw DetectorError("cannot read detector " + path.string() + ": " + e.what());
  }
  c10::IValue meta_value;
  if (!archive.try_read("meta", meta_value) || !meta_value.isString()) {
    throw DetectorError("detector file has no metadata record");
  }
  DetectorConfig config;
  int num_classes = 0;
  try {
    const auto meta = json::parse(meta_value.toStringRef());
    if (meta.value("format", "") != "iterdraw-detector") throw DetectorError("not a detector file");
    num_classes = meta.at("num_classes").get<int>();
    config.input_side = meta.at("input_side").get<int>();
    config.width = meta.at("width").get<int>();
    config.threshold = meta.at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw DetectorError(std::string("malformed detector metadata: ") + e.what());
  }
  auto detector = std::make_unique<Detector>(num_classes, config);
  torch::serialize::InputArchive sub;
  archive.read("net", sub);
  detector->net()->load(sub);
  return detector;
}

std::unique_ptr<Detector> train_detector(const std::vector<DetectorExample>& examples, int num_classes,
                                         const DetectorConfig& config) {
  if (examples.empty()) throw std::invalid_argument("train_detector: empty dataset");
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0)) {
    throw std::invalid_argument("train_detector: invalid schedule");
  }
  torch::manual_seed(config.seed);
  auto detector = std::make_unique<Detector>(num_classes, config);
  auto net = detector->net();

  std::vector<torch::Tensor> images;
  std::vector<torch::Tensor> presence;
  std::vector<torch::Tensor> centroids;
  for (const auto& example : examples) {
    if (example.image.height() != example.image.width()) throw std::invalid_argument("detector images must be square");
    const auto sized = resize_image(example.image, config.input_side, config.input_side);
    images.push_back(image_to_tensor(sized));
    const auto targets = detector_targets(example.scene, num_classes, example.image.width());
    presence.push_back(targets.presence);
    centroids.push_back(targets.centroids);
  }
  const auto all_images = torch::stack(images);
  const auto all_presence = torch::stack(presence);
  const auto all_centroids = torch::stack(centroids);

  torch::optim::Adam optimizer(net->parameters(), torch::optim::AdamOptions(config.learning_rate));
  std::mt19937_64 rng(config.seed);
  std::vector<std::int64_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  net->train();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto index = torch::tensor(std::vector<std::int64_t>(order.begin() + start, order.begin() + end));
      const auto batch_presence = all_presence.index_select(0, index);
      const auto out = net->forward(all_images.index_select(0, index));
      const auto loss = detection_loss(out.logits, batch_presence) +
                        masked_localization_loss(out.centroids, all_centroids.index_select(0, index),
                                                 batch_presence);
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
      total += loss.item<double>();
      ++batches;
    }
    if (config.on_epoch) config.on_epoch(epoch + 1, total / batches);
  }
  net->eval();
  return detector;
}

std::vector<DetectorExample> detector_examples(const std::vector<SceneSequence>& sequences,
                                               bool include_backgrounds) {
  std::vector<DetectorExample> out;
  for (const auto& sequence : sequences) {
    if (include_backgrounds) out.push_back({sequence.background, {}});
    for (const auto& turn : sequence.turns) out.push_back({turn.image, turn.scene});
  }
  return out;
}

DetectionSet oracle_detect(const std::vector<ObjectSpec>& scene) {
  DetectionSet out;
  for (const auto& object : scene) {
    out.presence[object.class_id] = 1.0f;
    out.centroids[object.class_id] = object.centroid;
  }
  return out;
}

}  // namespace iterdraw
