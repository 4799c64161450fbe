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

#include "iterdraw/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "iterdraw/losses.hpp"

namespace iterdraw {

void TrainConfig::validate() const {
  for (double lr : {lr_discriminator, lr_generator, lr_text, lr_context, lr_image_encoder}) {
    if (!(lr > 0)) throw std::invalid_argument("learning rates must be positive");
  }
  if (!(grad_clip_norm > 0)) throw std::invalid_argument("grad_clip_norm must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (aux_weight < 0 || gp_weight < 0 || ca_kl_weight < 0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (max_steps < 0 || checkpoint_every < 0) throw std::invalid_argument("step counts must be non-negative");
  if (model_preset != "full" && model_preset != "desk") {
    throw std::invalid_argument("model_preset must be 'full' or 'desk'");
  }
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      const auto last = s.find_last_not_of(" \t\r");
      return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      if (key == "lr_D" || key == "lr_discriminator") config.lr_discriminator = std::stod(value);
      else if (key == "lr_G" || key == "lr_generator") config.lr_generator = std::stod(value);
      else if (key == "lr_text") config.lr_text = std::stod(value);
      else if (key == "lr_R" || key == "lr_context") config.lr_context = std::stod(value);
      else if (key == "lr_img_enc" || key == "lr_image_encoder") config.lr_image_encoder = std::stod(value);
      else if (key == "adam_beta1") config.adam_beta1 = std::stod(value);
      else if (key == "adam_beta2") config.adam_beta2 = std::stod(value);
      else if (key == "weight_decay") config.weight_decay = std::stod(value);
      else if (key == "grad_clip_norm") config.grad_clip_norm = std::stod(value);
      else if (key == "batch_size") config.batch_size = std::stoi(value);
      else if (key == "beta" || key == "aux_weight") config.aux_weight = std::stod(value);
      else if (key == "gamma" || key == "gp_weight") config.gp_weight = std::stod(value);
      else if (key == "ca_kl" || key == "ca_kl_weight") config.ca_kl_weight = std::stod(value);
      else if (key == "max_steps") config.max_steps = std::stoll(value);
      else if (key == "checkpoint_every") config.checkpoint_every = std::stoll(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "embeddings_path") config.embeddings_path = value;
      else if (key == "model_preset") config.model_preset = value;
      else throw std::invalid_argument("config line " + std::to_string(line_number) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": bad value for '" + key + "'");
    }
  }
  config.validate();
  return config;
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

PreparedSequence prepare_sequence(const DrawerModel& model, const SceneSequence& sequence) {
  if (sequence.turns.empty()) throw std::invalid_argument("sequence " + sequence.id + " has no turns");
  PreparedSequence out;
  out.id = sequence.id;
  const auto num_classes = model.dims().num_classes;
  auto presence_row = [&](const Turn& turn) {
    auto row = torch::zeros({num_classes});
    for (const auto& object : turn.scene) {
      if (object.class_id < 0 || object.class_id >= num_classes) {
        throw std::invalid_argument("class id outside the model's class range");
      }
      row[object.class_id] = 1.0f;
    }
    return row;
  };
  std::vector<torch::Tensor> images{model.prepare_image(sequence.background)};
  std::vector<torch::Tensor> presence;
  if (model.ablation().iterative) {
    for (const auto& turn : sequence.turns) {
      images.push_back(model.prepare_image(turn.image));
      out.instructions.push_back(model.token_ids(turn.instruction_tokens));
      presence.push_back(presence_row(turn));
    }
  } else {
    std::vector<std::string> all_tokens;
    for (const auto& turn : sequence.turns) {
      all_tokens.insert(all_tokens.end(), turn.instruction_tokens.begin(), turn.instruction_tokens.end());
    }
    images.push_back(model.prepare_image(sequence.turns.back().image));
    out.instructions.push_back(model.token_ids(all_tokens));
    presence.push_back(presence_row(sequence.turns.back()));
  }
  out.images = torch::cat(images, 0);
  out.presence = torch::stack(presence);
  return out;
}

Trainer::Trainer(DrawerModel& model, const TrainConfig& config) : model_(model), config_(config) {
  config_.validate();
  torch::manual_seed(config_.seed);
  groups_ = model_.parameter_groups();
  auto adam = [&](std::vector<torch::optim::OptimizerParamGroup> groups) {
    auto options = torch::optim::AdamOptions(config_.lr_discriminator)
                       .betas({config_.adam_beta1, config_.adam_beta2})
                       .weight_decay(config_.weight_decay);
    return std::make_unique<torch::optim::Adam>(std::move(groups), options);
  };
  auto group = [&](const std::vector<torch::Tensor>& params, double lr) {
    auto options = std::make_unique<torch::optim::AdamOptions>(lr);
    options->betas({config_.adam_beta1, config_.adam_beta2}).weight_decay(config_.weight_decay);
    return torch::optim::OptimizerParamGroup(params, std::move(options));
  };
  optimizers_["discriminator"] = adam({group(groups_["discriminator"], config_.lr_discriminator),
                                       group(groups_["image_encoder"], config_.lr_image_encoder)});
  std::vector<torch::Tensor> generator_params = groups_["generator"];
  const auto& ca = groups_["conditioning_augmentation"];
  generator_params.insert(generator_params.end(), ca.begin(), ca.end());
  optimizers_["generator"] = adam({group(generator_params, config_.lr_generator)});
  optimizers_["canvas_encoder"] = adam({group(groups_["canvas_encoder"], config_.lr_image_encoder)});
  optimizers_["context"] = adam({group(groups_["context"], config_.lr_context)});
  optimizers_["text_encoder"] = adam({group(groups_["text_encoder"], config_.lr_text)});
}

torch::optim::Adam& Trainer::optimizer(const std::string& name) {
  const auto it = optimizers_.find(name);
  if (it == optimizers_.end()) throw std::out_of_range("no optimizer named " + name);
  return *it->second;
}

NamedOptimizers Trainer::named_optimizers() {
  NamedOptimizers out;
  for (auto& [name, optimizer] : optimizers_) out.emplace_back(name, optimizer.get());
  return out;
}

double Trainer::clip(const std::vector<torch::Tensor>& params) {
  std::vector<torch::Tensor> with_grad;
  for (const auto& p : params) {
    if (p.grad().defined()) with_grad.push_back(p);
  }
  if (with_grad.empty()) return 0.0;
  return torch::nn::utils::clip_grad_norm_(with_grad, config_.grad_clip_norm);
}

namespace {

void zero_grads(const std::vector<torch::Tensor>& params) {
  for (auto p : params) {
    if (p.grad().defined()) p.mutable_grad() = torch::Tensor();
  }
}

std::vector<torch::Tensor> snapshot_grads(const std::vector<torch::Tensor>& params) {
  std::vector<torch::Tensor> out;
  for (const auto& p : params) out.push_back(p.grad().defined() ? p.grad().clone() : torch::zeros_like(p));
  return out;
}

double grad_delta(const std::vector<torch::Tensor>& params, const std::vector<torch::Tensor>& before) {
  double total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto after = params[i].grad().defined() ? params[i].grad() : torch::zeros_like(params[i]);
    total += (after - before[i]).pow(2).sum().item<double>();
  }
  return std::sqrt(total);
}

double as_double(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

}  // namespace

BatchMetrics Trainer::train_sequence_batch(const std::vector<const PreparedSequence*>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const std::size_t steps = batch.front()->length();
  for (const auto* sequence : batch) {
    if (sequence->length() != steps) throw std::invalid_argument("batch sequences must share one length");
  }
  model_.train(true);
  const auto& ablation = model_.ablation();
  const auto batch_size = static_cast<std::int64_t>(batch.size());

  std::vector<torch::Tensor> image_list;
  std::vector<torch::Tensor> presence_list;
  for (const auto* sequence : batch) {
    image_list.push_back(sequence->images);
    presence_list.push_back(sequence->presence);
  }
  const auto images = torch::stack(image_list);      // [B, T+1, 3, S, S]
  const auto presence = torch::stack(presence_list);  // [B, T, N]

  for (const auto& name : {"canvas_encoder", "context", "text_encoder"}) zero_grads(groups_[name]);

  auto& d_optimizer = *optimizers_["discriminator"];
  auto& g_optimizer = *optimizers_["generator"];
  auto discriminator_params = groups_["discriminator"];
  discriminator_params.insert(discriminator_params.end(), groups_["image_encoder"].begin(),
                              groups_["image_encoder"].end());
  auto generator_params = groups_["generator"];
  generator_params.insert(generator_params.end(), groups_["conditioning_augmentation"].begin(),
                          groups_["conditioning_augmentation"].end());

  BatchMetrics metrics;
  auto context = model_.context->initial_state(batch_size);
  for (std::size_t t = 0; t < steps; ++t) {
    StepMetrics step;
    step.turn = static_cast<int>(t) + 1;

    std::vector<std::vector<std::int64_t>> ids;
    for (const auto* sequence : batch) ids.push_back(sequence->instructions[t]);
    const auto instruction = model_.text_encoder->forward(make_token_batch(ids));
    context = model_.context->forward(instruction, context);

    const auto previous = images.select(1, static_cast<std::int64_t>(t));
    const auto real = images.select(1, static_cast<std::int64_t>(t) + 1);
    const auto targets = presence.select(1, static_cast<std::int64_t>(t));
    if (canvas_observer_) canvas_observer_(step.turn, previous);

    // G sees a detached context: R and the text encoder learn from D only.
    const auto g_context = context.detach();
    torch::Tensor canvas_features;
    if (ablation.generator_prior) canvas_features = model_.canvas_encoder->forward(previous);
    const auto noise = torch::randn({batch_size, model_.dims().noise_dim});
    const auto condition =
        model_.conditioning->forward(g_context, torch::randn({batch_size, model_.dims().context_dim}));
    const auto fake = model_.generator->forward(noise, condition.c_aug, g_context, canvas_features);

    // Discriminator update.
    zero_grads(discriminator_params);
    const auto real_out = model_.discriminator->forward(real, previous, context);
    const auto fake_out = model_.discriminator->forward(fake.detach(), previous, context);
    torch::Tensor wrong_score;
    if (ablation.wrong_instruction_loss && batch_size >= 2) {
      wrong_score = model_.discriminator->forward(real, previous, context.roll(1, 0)).score;
    }
    auto d_loss = losses::d_hinge_loss(real_out.score, fake_out.score, wrong_score);
    torch::Tensor d_aux;
    if (ablation.aux_loss) {
      d_aux = losses::aux_bce(targets, torch::sigmoid(real_out.aux_logits));
      d_loss = d_loss + config_.aux_weight * d_aux;
    }
    const auto detached_context = context.detach();
    const auto penalty = losses::gradient_penalty(
        [&](const torch::Tensor& x) {
          return model_.discriminator->forward(x, previous, detached_context).score;
        },
        real, config_.gp_weight);
    const auto d_total = d_loss + penalty;

    step.d_real = as_double(torch::clamp_min(1.0 - real_out.score, 0.0).mean());
    step.d_fake = as_double(torch::clamp_min(1.0 + fake_out.score, 0.0).mean());
    step.d_wrong = wrong_score.defined() ? as_double(torch::clamp_min(1.0 + wrong_score, 0.0).mean()) : 0.0;
    step.d_aux = as_double(d_aux);
    step.gradient_penalty = as_double(penalty);
    step.d_loss = as_double(d_total);
    if (!std::isfinite(step.d_loss)) {
      throw NonFiniteLossError("non-finite discriminator loss at turn " + std::to_string(step.turn), step);
    }
    // The context graph is shared by every step of the sequence.
    d_total.backward({}, /*retain_graph=*/true);
    step.grad_norms["discriminator"] = clip(groups_["discriminator"]);
    step.grad_norms["image_encoder"] = clip(groups_["image_encoder"]);
    d_optimizer.step();
    ++counters_.discriminator;

    // Generator update against the freshly updated discriminator.
    zero_grads(generator_params);
    const auto text_before = snapshot_grads(groups_["text_encoder"]);
    const auto context_before = snapshot_grads(groups_["context"]);
    const auto g_out = model_.discriminator->forward(fake, previous, g_context);
    torch::Tensor g_aux;
    if (ablation.aux_loss) g_aux = losses::aux_bce(targets, torch::sigmoid(g_out.aux_logits));
    auto g_loss = losses::g_hinge_loss(g_out.score, g_aux, config_.aux_weight);
    torch::Tensor kl;
    if (config_.ca_kl_weight > 0) {
      kl = ConditioningAugmentationImpl::kl_divergence(condition);
      g_loss = g_loss + config_.ca_kl_weight * kl;
    }
    step.g_adversarial = as_double(-g_out.score.mean());
    step.g_aux = as_double(g_aux);
    step.kl = as_double(kl);
    step.g_loss = as_double(g_loss);
    if (!std::isfinite(step.g_loss)) {
      throw NonFiniteLossError("non-finite generator loss at turn " + std::to_string(step.turn), step);
    }
    g_loss.backward();
    step.text_grad_from_generator = grad_delta(groups_["text_encoder"], text_before);
    step.context_grad_from_generator = grad_delta(groups_["context"], context_before);
    step.grad_norms["generator"] = clip(groups_["generator"]);
    step.grad_norms["conditioning_augmentation"] = clip(groups_["conditioning_augmentation"]);
    g_optimizer.step();
    zero_grads(discriminator_params);
    ++counters_.generator;
    ++model_.step_counter;
    metrics.steps.push_back(std::move(step));
  }

  if (ablation.generator_prior) {
    metrics.sequence_grad_norms["canvas_encoder"] = clip(groups_["canvas_encoder"]);
    optimizers_["canvas_encoder"]->step();
    ++counters_.canvas_encoder;
  }
  metrics.sequence_grad_norms["context"] = clip(groups_["context"]);
  optimizers_["context"]->step();
  ++counters_.context;
  metrics.sequence_grad_norms["text_encoder"] = clip(groups_["text_encoder"]);
  optimizers_["text_encoder"]->step();
  ++counters_.text_encoder;
  for (const auto& name : {"canvas_encoder", "context", "text_encoder"}) zero_grads(groups_[name]);
  return metrics;
}

void Trainer::save(const std::filesystem::path& path) { save_checkpoint(model_, path, named_optimizers()); }

void Trainer::load(const std::filesystem::path& path) { load_checkpoint_into(model_, path, named_optimizers()); }

std::vector<ImageGrid> evaluate_rollout(DrawerModel& model, const SceneSequence& sequence, std::uint64_t seed) {
  if (sequence.turns.empty()) return {};
  model.train(false);
  torch::NoGradGuard no_grad;
  auto context = model.context->initial_state(1);
  auto canvas = model.prepare_image(sequence.background);
  std::vector<ImageGrid> out;
  if (!model.ablation().iterative) {
    std::vector<std::string> all_tokens;
    for (const auto& turn : sequence.turns) {
      all_tokens.insert(all_tokens.end(), turn.instruction_tokens.begin(), turn.instruction_tokens.end());
    }
    canvas = model.infer_step(model.token_ids(all_tokens), context, canvas, step_noise(seed, 1, model.dims()));
    out.push_back(model.output_image(canvas));
    return out;
  }
  int t = 0;
  for (const auto& turn : sequence.turns) {
    ++t;
    canvas = model.infer_step(model.token_ids(turn.instruction_tokens), context, canvas,
                              step_noise(seed, t, model.dims()));
    out.push_back(model.output_image(canvas));
  }
  return out;
}

std::vector<std::string> dataset_vocabulary(const std::vector<SceneSequence>& sequences) {
  std::set<std::string> words;
  for (const auto& sequence : sequences) {
    for (const auto& turn : sequence.turns) words.insert(turn.instruction_tokens.begin(), turn.instruction_tokens.end());
  }
  return {words.begin(), words.end()};
}

void train(DrawerModel& model, const std::vector<SceneSequence>& sequences, const TrainConfig& config,
           const TrainRunOptions& options) {
  if (sequences.empty()) throw std::invalid_argument("no training sequences");
  Trainer trainer(model, config);
  std::vector<PreparedSequence> prepared;
  prepared.reserve(sequences.size());
  for (const auto& sequence : sequences) prepared.push_back(prepare_sequence(model, sequence));

  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < prepared.size(); ++i) buckets[prepared[i].length()].push_back(i);

  std::mt19937_64 rng(config.seed);
  std::int64_t step = 0;
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  std::int64_t next_checkpoint = config.checkpoint_every;
  while (step < config.max_steps) {
    std::vector<std::vector<const PreparedSequence*>> batches;
    for (auto& [length, members] : buckets) {
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t start = 0; start < members.size(); start += static_cast<std::size_t>(config.batch_size)) {
        std::vector<const PreparedSequence*> batch;
        const auto end = std::min(members.size(), start + static_cast<std::size_t>(config.batch_size));
        for (std::size_t k = start; k < end; ++k) batch.push_back(&prepared[members[k]]);
        batches.push_back(std::move(batch));
      }
    }
    std::shuffle(batches.begin(), batches.end(), rng);
    for (const auto& batch : batches) {
      if (step >= config.max_steps) break;
      const auto metrics = trainer.train_sequence_batch(batch);
      for (const auto& s : metrics.steps) {
        ++step;
        if (options.on_step) options.on_step(step, s);
      }
      if (config.checkpoint_every > 0 && step >= next_checkpoint && !options.out_dir.empty()) {
        trainer.save(options.out_dir / ("checkpoint_" + std::to_string(step) + ".pt"));
        next_checkpoint += config.checkpoint_every;
      }
    }
  }
  if (!options.out_dir.empty()) trainer.save(options.out_dir / "checkpoint.pt");
}

}  // namespace iterdraw
