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

#ifndef ITERDRAW_TRAINER_HPP_
#define ITERDRAW_TRAINER_HPP_

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdraw/model.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw {

struct TrainConfig {
  double lr_discriminator = 0.0004;
  double lr_generator = 0.0001;
  double lr_text = 0.003;
  double lr_context = 0.0003;
  double lr_image_encoder = 0.006;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  double weight_decay = 0.0;
  double grad_clip_norm = 50.0;
  int batch_size = 32;
  double aux_weight = 20.0;  // beta
  double gp_weight = 10.0;   // gamma
  double ca_kl_weight = 0.0;
  std::int64_t max_steps = 10000;
  std::int64_t checkpoint_every = 0;
  std::uint64_t seed = 0;
  std::string embeddings_path;
  std::string model_preset = "full";

  void validate() const;

  // Flat "key = value" text; '#' starts a comment. Unknown keys throw.
  static TrainConfig parse(const std::string& text);
  static TrainConfig from_file(const std::filesystem::path& path);
};

// One training example with images already at the model resolution.
struct PreparedSequence {
  std::string id;
  torch::Tensor images;  // [T + 1, 3, S, S]; index 0 is x_0
  std::vector<std::vector<std::int64_t>> instructions;
  torch::Tensor presence;  // [T, num_classes], 1 where the class is in the scene
  std::size_t length() const { return instructions.size(); }
};

// The non-iterative ablation sees one step: all instructions concatenated,
// x_0 as the previous image and the final image as the target.
PreparedSequence prepare_sequence(const DrawerModel& model, const SceneSequence& sequence);

struct UpdateCounters {
  std::int64_t discriminator = 0;
  std::int64_t generator = 0;
  std::int64_t canvas_encoder = 0;
  std::int64_t context = 0;
  std::int64_t text_encoder = 0;
};

struct StepMetrics {
  int turn = 0;
  double d_loss = 0, d_real = 0, d_fake = 0, d_wrong = 0, d_aux = 0, gradient_penalty = 0;
  double g_loss = 0, g_adversarial = 0, g_aux = 0, kl = 0;
  // Pre-clipping gradient norms of the groups updated at this step.
  std::map<std::string, double> grad_norms;
  // Change in the text encoder and R gradients caused by the generator
  // backward pass; zero when they only learn from the discriminator.
  double text_grad_from_generator = 0;
  double context_grad_from_generator = 0;
};

struct BatchMetrics {
  std::vector<StepMetrics> steps;
  // Pre-clipping norms of the once-per-sequence groups.
  std::map<std::string, double> sequence_grad_norms;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(const std::string& what, StepMetrics diagnostic)
      : std::runtime_error(what), diagnostic_(std::move(diagnostic)) {}
  const StepMetrics& diagnostic() const { return diagnostic_; }

 private:
  StepMetrics diagnostic_;
};

class Trainer {
 public:
  Trainer(DrawerModel& model, const TrainConfig& config);

  // One teacher-forced pass over a batch of equal-length sequences: per time
  // step one D update then one G update; E_G, R and the text encoder step
  // once at the end from gradients accumulated over the sequence.
  BatchMetrics train_sequence_batch(const std::vector<const PreparedSequence*>& batch);

  const UpdateCounters& counters() const { return counters_; }
  const TrainConfig& config() const { return config_; }
  torch::optim::Adam& optimizer(const std::string& name);
  NamedOptimizers named_optimizers();

  // Called with (turn, canvas tensor fed to E_G) during training.
  void set_canvas_observer(std::function<void(int, const torch::Tensor&)> observer) {
    canvas_observer_ = std::move(observer);
  }

  void save(const std::filesystem::path& path);
  void load(const std::filesystem::path& path);

 private:
  double clip(const std::vector<torch::Tensor>& params);

  DrawerModel& model_;
  TrainConfig config_;
  std::map<std::string, std::vector<torch::Tensor>> groups_;
  std::map<std::string, std::unique_ptr<torch::optim::Adam>> optimizers_;
  UpdateCounters counters_;
  std::function<void(int, const torch::Tensor&)> canvas_observer_;
};

// Autoregressive rollout from the sequence background in eval mode. Each
// step consumes the previous generated image; noise comes from
// step_noise(seed, t). Returns one image per turn at the dataset resolution
// (a single image for the non-iterative ablation).
std::vector<ImageGrid> evaluate_rollout(DrawerModel& model, const SceneSequence& sequence, std::uint64_t seed);

struct TrainRunOptions {
  std::filesystem::path out_dir;
  std::function<void(std::int64_t, const StepMetrics&)> on_step;
};

// Buckets sequences by length, shuffles with the config seed and trains
// until max_steps D/G updates. Writes checkpoint.pt (and periodic
// checkpoints when checkpoint_every > 0) into out_dir.
void train(DrawerModel& model, const std::vector<SceneSequence>& sequences, const TrainConfig& config,
           const TrainRunOptions& options);

// Vocabulary over every token in the dataset, sorted.
std::vector<std::string> dataset_vocabulary(const std::vector<SceneSequence>& sequences);

}  // namespace iterdraw

#endif  // ITERDRAW_TRAINER_HPP_
