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

#include "iterdraw/model.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <fstream>

#include "iterdraw/image_io.hpp"
#include "iterdraw/tensor_convert.hpp"
#include "json.hpp"

namespace iterdraw {

using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t turn) {
  std::uint64_t z = seed ^ (turn * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

StepNoise step_noise(std::uint64_t seed, int turn, const ModelDims& dims) {
  auto generator = at::make_generator<at::CPUGeneratorImpl>(mix_seed(seed, static_cast<std::uint64_t>(turn)));
  StepNoise noise;
  noise.z = torch::randn({1, dims.noise_dim}, generator, torch::kFloat32);
  noise.augmentation = torch::randn({1, dims.context_dim}, generator, torch::kFloat32);
  return noise;
}

DrawerModel::DrawerModel(const ModelDims& dims, const AblationConfig& ablation,
                         const EmbeddingTable& vocabulary, const ImageGrid& background, std::uint64_t seed)
    : dims_(dims), ablation_(ablation), vocabulary_(vocabulary), background_(background), seed_(seed) {
  dims.validate();
  if (vocabulary.dim() != dims.embedding_dim) {
    throw std::invalid_argument("vocabulary dimension does not match embedding_dim");
  }
  if (background.empty()) throw std::invalid_argument("model needs a background canvas");
  torch::manual_seed(seed);
  text_encoder = InstructionEncoder(vocabulary, dims.text_hidden);
  context = ContextRecurrence(2 * dims.text_hidden, dims.context_dim);
  conditioning = ConditioningAugmentation(dims.context_dim, dims.context_dim);
  canvas_encoder = CanvasEncoder(dims);
  generator = Generator(dims, ablation.generator_prior);
  discriminator = Discriminator(dims, ablation.fusion);
}

std::vector<std::int64_t> DrawerModel::token_ids(const std::vector<std::string>& tokens) const {
  return map_tokens(vocabulary_, tokens);
}

torch::Tensor DrawerModel::prepare_image(const ImageGrid& image) const {
  const auto side = static_cast<int>(dims_.image_side);
  return image_to_tensor(resize_image(image, side, side)).unsqueeze(0);
}

ImageGrid DrawerModel::output_image(const torch::Tensor& image) const {
  return resize_image(tensor_to_image(image), canvas_side(), canvas_side());
}

void DrawerModel::train(bool on) {
  text_encoder->train(on);
  context->train(on);
  conditioning->train(on);
  canvas_encoder->train(on);
  generator->train(on);
  discriminator->train(on);
}

std::map<std::string, std::vector<torch::Tensor>> DrawerModel::parameter_groups() {
  std::map<std::string, std::vector<torch::Tensor>> groups;
  groups["generator"] = generator->parameters();
  groups["conditioning_augmentation"] = conditioning->parameters();
  groups["image_encoder"] = discriminator->encoder->parameters();
  auto& body = groups["discriminator"];
  for (const auto& item : discriminator->named_parameters()) {
    if (item.key().rfind("encoder.", 0) != 0) body.push_back(item.value());
  }
  groups["canvas_encoder"] = canvas_encoder->parameters();
  groups["context"] = context->parameters();
  groups["text_encoder"] = text_encoder->parameters();
  return groups;
}

torch::Tensor DrawerModel::infer_step(const std::vector<std::int64_t>& ids, torch::Tensor& state,
                                      const torch::Tensor& canvas, const StepNoise& noise) {
  torch::NoGradGuard no_grad;
  const auto instruction = text_encoder->encode(ids).unsqueeze(0);
  state = context->forward(instruction, state);
  const auto condition = conditioning->forward(state, noise.augmentation);
  torch::Tensor features;
  if (ablation_.generator_prior) features = canvas_encoder->forward(canvas);
  return generator->forward(noise.z, condition.c_aug, state, features);
}

namespace {

json dims_to_json(const ModelDims& d) {
  return {{"noise_dim", d.noise_dim},         {"context_dim", d.context_dim},
          {"embedding_dim", d.embedding_dim}, {"text_hidden", d.text_hidden},
          {"canvas_grid", d.canvas_grid},     {"canvas_channels", d.canvas_channels},
          {"disc_grid", d.disc_grid},         {"disc_channels", d.disc_channels},
          {"image_side", d.image_side},       {"num_classes", d.num_classes},
          {"gen_width", d.gen_width},         {"disc_width", d.disc_width}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.noise_dim = j.at("noise_dim");
  d.context_dim = j.at("context_dim");
  d.embedding_dim = j.at("embedding_dim");
  d.text_hidden = j.at("text_hidden");
  d.canvas_grid = j.at("canvas_grid");
  d.canvas_channels = j.at("canvas_channels");
  d.disc_grid = j.at("disc_grid");
  d.disc_channels = j.at("disc_channels");
  d.image_side = j.at("image_side");
  d.num_classes = j.at("num_classes");
  d.gen_width = j.at("gen_width");
  d.disc_width = j.at("disc_width");
  return d;
}

json ablation_to_json(const AblationConfig& a) {
  return {{"name", a.name},
          {"wrong_instruction_loss", a.wrong_instruction_loss},
          {"generator_prior", a.generator_prior},
          {"aux_loss", a.aux_loss},
          {"fusion", to_string(a.fusion)},
          {"iterative", a.iterative}};
}

AblationConfig ablation_from_json(const json& j) {
  AblationConfig a;
  a.name = j.at("name");
  a.wrong_instruction_loss = j.at("wrong_instruction_loss");
  a.generator_prior = j.at("generator_prior");
  a.aux_loss = j.at("aux_loss");
  a.fusion = fusion_from_string(j.at("fusion"));
  a.iterative = j.at("iterative");
  return a;
}

struct Component {
  const char* name;
  std::shared_ptr<torch::nn::Module> module;
};

std::vector<Component> components(DrawerModel& model) {
  return {{"text_encoder", model.text_encoder.ptr()}, {"context", model.context.ptr()},
          {"conditioning", model.conditioning.ptr()}, {"canvas_encoder", model.canvas_encoder.ptr()},
          {"generator", model.generator.ptr()},       {"discriminator", model.discriminator.ptr()}};
}

json read_meta(torch::serialize::InputArchive& archive) {
  c10::IValue meta;
  if (!archive.try_read("meta", meta) || !meta.isString()) {
    throw CheckpointError("checkpoint has no metadata record");
  }
  json doc = json::parse(meta.toStringRef());
  if (doc.value("format", std::string()) != "iterdraw-checkpoint") {
    throw CheckpointError("not an iterdraw checkpoint");
  }
  const int version = doc.value("version", 0);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  return doc;
}

void open_archive(torch::serialize::InputArchive& archive, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CheckpointError("checkpoint not found: " + path.string());
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("corrupt checkpoint archive " + path.string());
  }
}

void load_state(DrawerModel& model, torch::serialize::InputArchive& archive,
                const NamedOptimizers& optimizers, const json& meta) {
  try {
    for (const auto& component : components(model)) {
      torch::serialize::InputArchive sub;
      archive.read(component.name, sub);
      component.module->load(sub);
    }
    for (const auto& [name, optimizer] : optimizers) {
      torch::serialize::InputArchive sub;
      if (archive.try_read("optimizer." + name, sub)) optimizer->load(sub);
    }
  } catch (const c10::Error& e) {
    throw CheckpointError(std::string("corrupt checkpoint archive: ") + e.what_without_backtrace());
  }
  model.step_counter = meta.value("step_counter", std::int64_t{0});
}

}  // namespace

void save_checkpoint(DrawerModel& model, const std::filesystem::path& path, const NamedOptimizers& optimizers) {
  torch::serialize::OutputArchive archive;
  json meta = {{"format", "iterdraw-checkpoint"},
               {"version", kCheckpointVersion},
               {"dims", dims_to_json(model.dims())},
               {"ablation", ablation_to_json(model.ablation())},
               {"step_counter", model.step_counter},
               {"seed", model.seed()},
               {"vocabulary", model.vocabulary().words()},
               {"canvas_side", model.canvas_side()}};
  archive.write("meta", c10::IValue(meta.dump()));
  archive.write("background", image_to_tensor(model.background()), /*is_buffer=*/true);
  for (const auto& component : components(model)) {
    torch::serialize::OutputArchive sub;
    component.module->save(sub);
    archive.write(component.name, sub);
  }
  for (const auto& [name, optimizer] : optimizers) {
    torch::serialize::OutputArchive sub;
    optimizer->save(sub);
    archive.write("optimizer." + name, sub);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  archive.save_to(path.string());
}

std::unique_ptr<DrawerModel> load_checkpoint(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  open_archive(archive, path);
  json meta;
  try {
    meta = read_meta(archive);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint metadata: ") + e.what());
  }
  const auto dims = dims_from_json(meta.at("dims"));
  const auto ablation = ablation_from_json(meta.at("ablation"));
  EmbeddingTable vocabulary(static_cast<int>(dims.embedding_dim));
  const std::vector<float> zeros(static_cast<std::size_t>(dims.embedding_dim), 0.0f);
  const auto words = meta.at("vocabulary").get<std::vector<std::string>>();
  for (std::size_t i = 1; i < words.size(); ++i) vocabulary.add(words[i], zeros);

  torch::Tensor background;
  try {
    archive.read("background", background, /*is_buffer=*/true);
  } catch (const c10::Error&) {
    throw CheckpointError("checkpoint has no background canvas");
  }
  auto model = std::make_unique<DrawerModel>(dims, ablation, vocabulary, tensor_to_image(background),
                                             meta.value("seed", std::uint64_t{0}));
  load_state(*model, archive, {}, meta);
  return model;
}

void load_checkpoint_into(DrawerModel& model, const std::filesystem::path& path, const NamedOptimizers& optimizers) {
  torch::serialize::InputArchive archive;
  open_archive(archive, path);
  json meta;
  try {
    meta = read_meta(archive);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint metadata: ") + e.what());
  }
  const auto dims = dims_from_json(meta.at("dims"));
  if (dims.num_classes != model.dims().num_classes) {
    throw IncompatibleCheckpointError("checkpoint has " + std::to_string(dims.num_classes) +
                                      " classes, model expects " + std::to_string(model.dims().num_classes));
  }
  if (!(dims == model.dims())) throw IncompatibleCheckpointError("checkpoint model dimensions differ");
  if (!(ablation_from_json(meta.at("ablation")) == model.ablation())) {
    throw IncompatibleCheckpointError("checkpoint ablation configuration differs");
  }
  load_state(model, archive, optimizers, meta);
}

}  // namespace iterdraw
