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

#include "iterdraw/session.hpp"

#include <cstdio>

#include "iterdraw/image_io.hpp"
#include "iterdraw/tokenize.hpp"
#include "json.hpp"

namespace iterdraw {

using json = nlohmann::json;

namespace {

struct Step {
  torch::Tensor canvas;
  ImageGrid image;
};

std::vector<std::string> instruction_tokens(const std::string& instruction) {
  auto tokens = tokenize(instruction);
  if (tokens.empty()) throw SessionError(SessionErrorKind::kBadRequest, "instruction is empty");
  return tokens;
}

Step advance(DrawerModel& model, torch::Tensor& context, const torch::Tensor& canvas, std::uint64_t seed,
             int turn, const std::string& instruction) {
  const auto ids = model.token_ids(instruction_tokens(instruction));
  auto next = model.infer_step(ids, context, canvas, step_noise(seed, turn, model.dims()));
  auto image = model.output_image(next);
  return {std::move(next), std::move(image)};
}

}  // namespace

ReplayState replay_session(DrawerModel& model, const ImageGrid& initial, std::uint64_t seed,
                           const std::vector<std::string>& instructions) {
  ReplayState state;
  state.context = model.context->initial_state(1);
  state.canvas = model.prepare_image(initial);
  state.canvas_image = initial;
  int turn = 0;
  for (const auto& instruction : instructions) {
    auto step = advance(model, state.context, state.canvas, seed, ++turn, instruction);
    state.canvas = std::move(step.canvas);
    state.canvas_image = step.image;
    state.history.push_back({instruction, std::move(step.image)});
  }
  return state;
}

void FifoLock::lock() {
  std::unique_lock<std::mutex> guard(mutex_);
  const auto ticket = next_ticket_++;
  turn_.wait(guard, [&] { return serving_ == ticket; });
}

void FifoLock::unlock() {
  {
    std::lock_guard<std::mutex> guard(mutex_);
    ++serving_;
  }
  turn_.notify_all();
}

SessionManager::SessionManager(std::optional<std::uint64_t> id_seed)
    : id_rng_(id_seed ? *id_seed : std::random_device{}()) {}

void SessionManager::add_checkpoint(const std::string& name, std::shared_ptr<DrawerModel> model) {
  if (!model) throw std::invalid_argument("add_checkpoint: null model");
  model->train(false);
  std::unique_lock guard(sessions_mutex_);
  models_[name] = std::move(model);
  if (default_checkpoint_.empty()) default_checkpoint_ = name;
}

std::vector<std::string> SessionManager::checkpoints() const {
  std::shared_lock guard(sessions_mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : models_) out.push_back(name);
  return out;
}

std::string SessionManager::default_checkpoint() const {
  std::shared_lock guard(sessions_mutex_);
  return default_checkpoint_;
}

std::shared_ptr<DrawerModel> SessionManager::model(const std::string& name) const {
  std::shared_lock guard(sessions_mutex_);
  const auto it = models_.find(name);
  if (it == models_.end()) throw SessionError(SessionErrorKind::kBadRequest, "unknown checkpoint: " + name);
  return it->second;
}

std::string SessionManager::new_id() {
  std::lock_guard<std::mutex> guard(id_mutex_);
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(id_rng_()));
  return buffer;
}

std::string SessionManager::insert(std::shared_ptr<Session> session, const std::optional<std::string>& id) {
  std::unique_lock guard(sessions_mutex_);
  if (id) {
    session->id = *id;
  } else {
    do {
      session->id = new_id();
    } while (sessions_.contains(session->id));
  }
  sessions_[session->id] = session;
  return session->id;
}

std::string SessionManager::create(const std::optional<std::string>& checkpoint,
                                   const std::optional<ImageGrid>& initial_image, std::optional<std::uint64_t> seed) {
  if (checkpoints().empty()) throw SessionError(SessionErrorKind::kBadRequest, "no checkpoint loaded");
  auto session = std::make_shared<Session>();
  session->checkpoint = checkpoint.value_or(default_checkpoint());
  session->model = model(session->checkpoint);
  const int side = session->model->canvas_side();
  if (initial_image) {
    if (initial_image->height() != side || initial_image->width() != side) {
      throw SessionError(SessionErrorKind::kUnprocessable,
                         "initial image must be " + std::to_string(side) + "x" + std::to_string(side) + ", got " +
                             std::to_string(initial_image->width()) + "x" + std::to_string(initial_image->height()));
    }
    session->initial_image = *initial_image;
  } else {
    session->initial_image = session->model->background();
  }
  session->seed = seed.value_or(session->model->seed());
  session->state = replay_session(*session->model, session->initial_image, session->seed, {});
  session->created_at = std::chrono::system_clock::now();
  return insert(std::move(session), std::nullopt);
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock guard(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError(SessionErrorKind::kNotFound, "no session " + id);
  return it->second;
}

StepResult SessionManager::step(const std::string& id, const std::string& instruction) {
  instruction_tokens(instruction);
  const auto session = find(id);
  std::lock_guard<FifoLock> guard(session->lock);
  auto& state = session->state;
  const int turn = static_cast<int>(state.history.size()) + 1;
  auto next = advance(*session->model, state.context, state.canvas, session->seed, turn, instruction);
  state.canvas = std::move(next.canvas);
  state.canvas_image = next.image;
  state.history.push_back({instruction, next.image});
  return {turn, std::move(next.image)};
}

SessionSnapshot SessionManager::snapshot_of(const Session& session) {
  SessionSnapshot out;
  out.id = session.id;
  out.checkpoint = session.checkpoint;
  out.seed = session.seed;
  out.initial_image = session.initial_image;
  out.canvas = session.state.canvas_image;
  out.history = session.state.history;
  out.context = session.state.context.clone();
  out.created_at = session.created_at;
  return out;
}

SessionSnapshot SessionManager::undo(const std::string& id) {
  const auto session = find(id);
  std::lock_guard<FifoLock> guard(session->lock);
  if (session->state.history.empty()) throw SessionError(SessionErrorKind::kConflict, "nothing to undo");
  std::vector<std::string> instructions;
  for (std::size_t i = 0; i + 1 < session->state.history.size(); ++i) {
    instructions.push_back(session->state.history[i].instruction);
  }
  session->state = replay_session(*session->model, session->initial_image, session->seed, instructions);
  return snapshot_of(*session);
}

SessionSnapshot SessionManager::get(const std::string& id) const {
  const auto session = find(id);
  std::lock_guard<FifoLock> guard(session->lock);
  return snapshot_of(*session);
}

void SessionManager::remove(const std::string& id) {
  std::unique_lock guard(sessions_mutex_);
  if (sessions_.erase(id) == 0) throw SessionError(SessionErrorKind::kNotFound, "no session " + id);
}

std::size_t SessionManager::size() const {
  std::shared_lock guard(sessions_mutex_);
  return sessions_.size();
}

std::string SessionManager::snapshot_json() const {
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::shared_lock guard(sessions_mutex_);
    for (const auto& [_, session] : sessions_) sessions.push_back(session);
  }
  json doc = {{"format", "iterdraw-sessions"}, {"sessions", json::array()}};
  for (const auto& session : sessions) {
    std::lock_guard<FifoLock> guard(session->lock);
    json instructions = json::array();
    for (const auto& entry : session->state.history) instructions.push_back(entry.instruction);
    doc["sessions"].push_back(
        {{"id", session->id},
         {"checkpoint", session->checkpoint},
         {"seed", session->seed},
         {"initial_image_b64", base64_encode(encode_png(session->initial_image))},
         {"instructions", instructions},
         {"created_at", std::chrono::duration_cast<std::chrono::milliseconds>(
                            session->created_at.time_since_epoch())
                            .count()}});
  }
  return doc.dump();
}

void SessionManager::restore_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SessionError(SessionErrorKind::kBadRequest, std::string("malformed session snapshot: ") + e.what());
  }
  if (doc.value("format", "") != "iterdraw-sessions") {
    throw SessionError(SessionErrorKind::kBadRequest, "not a session snapshot");
  }
  for (const auto& record : doc.at("sessions")) {
    auto session = std::make_shared<Session>();
    session->checkpoint = record.at("checkpoint").get<std::string>();
    session->model = model(session->checkpoint);
    session->seed = record.at("seed").get<std::uint64_t>();
    session->initial_image = decode_png(base64_decode(record.at("initial_image_b64").get<std::string>()));
    session->state = replay_session(*session->model, session->initial_image, session->seed,
                                    record.at("instructions").get<std::vector<std::string>>());
    session->created_at =
        std::chrono::system_clock::time_point(std::chrono::milliseconds(record.value("created_at", std::int64_t{0})));
    insert(std::move(session), record.at("id").get<std::string>());
  }
}

}  // namespace iterdraw
