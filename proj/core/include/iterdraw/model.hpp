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

#ifndef ITERDRAW_MODEL_HPP_
#define ITERDRAW_MODEL_HPP_

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdraw/embeddings.hpp"
#include "iterdraw/gan.hpp"
#include "iterdraw/text.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw {

// Noise for one generation step, derived only from (seed, turn).
struct StepNoise {
  torch::Tensor z;             // [1, N_z]
  torch::Tensor augmentation;  // [1, N_c]
};
StepNoise step_noise(std::uint64_t seed, int turn, const ModelDims& dims);

// Everything a trained drawer needs: text encoder, context recurrence,
// conditioning augmentation, canvas encoder, generator and discriminator,
// plus the vocabulary and the x_0 canvas.
class DrawerModel {
 public:
  DrawerModel(const ModelDims& dims, const AblationConfig& ablation, const EmbeddingTable& vocabulary,
              const ImageGrid& background, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  const AblationConfig& ablation() const { return ablation_; }
  const EmbeddingTable& vocabulary() const { return vocabulary_; }
  // x_0 at the dataset resolution.
  const ImageGrid& background() const { return background_; }
  int canvas_side() const { return background_.height(); }
  std::uint64_t seed() const { return seed_; }

  std::vector<std::int64_t> token_ids(const std::vector<std::string>& tokens) const;

  // Resizes to the model resolution and converts to a 1x3xSxS tensor.
  torch::Tensor prepare_image(const ImageGrid& image) const;
  // Model output back to an ImageGrid at the dataset resolution.
  ImageGrid output_image(const torch::Tensor& image) const;

  void train(bool on = true);

  // Named parameter groups: generator, conditioning_augmentation,
  // discriminator, image_encoder (E_D), canvas_encoder (E_G), context (R),
  // text_encoder.
  std::map<std::string, std::vector<torch::Tensor>> parameter_groups();

  // One autoregressive inference step. Updates `context` in place and
  // returns the new canvas (1x3xSxS). No gradients are recorded.
  torch::Tensor infer_step(const std::vector<std::int64_t>& ids, torch::Tensor& context,
                           const torch::Tensor& canvas, const StepNoise& noise);

  InstructionEncoder text_encoder{nullptr};
  ContextRecurrence context{nullptr};
  ConditioningAugmentation conditioning{nullptr};
  CanvasEncoder canvas_encoder{nullptr};
  Generator generator{nullptr};
  Discriminator discriminator{nullptr};

  std::int64_t step_counter = 0;

 private:
  ModelDims dims_;
  AblationConfig ablation_;
  EmbeddingTable vocabulary_;
  ImageGrid background_;
  std::uint64_t seed_;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IncompatibleCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr int kCheckpointVersion = 1;

using NamedOptimizers = std::vector<std::pair<std::string, torch::optim::Optimizer*>>;

// Single archive holding every parameter group, the dims, the ablation
// flags, the vocabulary, the background and the step counter, plus any
// optimizer states passed in.
void save_checkpoint(DrawerModel& model, const std::filesystem::path& path,
                     const NamedOptimizers& optimizers = {});

std::unique_ptr<DrawerModel> load_checkpoint(const std::filesystem::path& path);

// Loads into an existing model; throws IncompatibleCheckpointError when the
// stored dims or ablation differ.
void load_checkpoint_into(DrawerModel& model, const std::filesystem::path& path,
                          const NamedOptimizers& optimizers = {});

}  // namespace iterdraw

#endif  // ITERDRAW_MODEL_HPP_
