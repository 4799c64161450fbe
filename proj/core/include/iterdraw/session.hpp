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

#ifndef ITERDRAW_SESSION_HPP_
#define ITERDRAW_SESSION_HPP_

#include <torch/torch.h>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdraw/model.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw {

enum class SessionErrorKind { kBadRequest, kNotFound, kConflict, kUnprocessable };

class SessionError : public std::runtime_error {
 public:
  SessionError(SessionErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  SessionErrorKind kind() const { return kind_; }

 private:
  SessionErrorKind kind_;
};

struct HistoryEntry {
  std::string instruction;
  ImageGrid image;
};

struct SessionSnapshot {
  std::string id;
  std::string checkpoint;
  std::uint64_t seed = 0;
  ImageGrid initial_image;
  ImageGrid canvas;
  std::vector<HistoryEntry> history;
  torch::Tensor context;
  std::chrono::system_clock::time_point created_at;
};

struct StepResult {
  int turn_index = 0;
  ImageGrid image;
};

// State reached by running `instructions` from `initial`.
struct ReplayState {
  torch::Tensor context;
  torch::Tensor canvas;
  ImageGrid canvas_image;
  std::vector<HistoryEntry> history;
};

ReplayState replay_session(DrawerModel& model, const ImageGrid& initial, std::uint64_t seed,
                           const std::vector<std::string>& instructions);

// Requests on one session run one at a time in arrival order.
class FifoLock {
 public:
  void lock();
  void unlock();

 private:
  std::mutex mutex_;
  std::condition_variable turn_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

// In-memory interactive sessions over one or more loaded checkpoints. The
// models are shared read-only; each session has its own lock.
class SessionManager {
 public:
  explicit SessionManager(std::optional<std::uint64_t> id_seed = std::nullopt);

  // The first checkpoint added becomes the default.
  void add_checkpoint(const std::string& name, std::shared_ptr<DrawerModel> model);
  std::vector<std::string> checkpoints() const;
  std::string default_checkpoint() const;
  std::shared_ptr<DrawerModel> model(const std::string& name) const;

  // The z seed defaults to the checkpoint's seed, so sessions given the same
  // instructions draw the same images.
  std::string create(const std::optional<std::string>& checkpoint = std::nullopt,
                     const std::optional<ImageGrid>& initial_image = std::nullopt,
                     std::optional<std::uint64_t> seed = std::nullopt);
  StepResult step(const std::string& id, const std::string& instruction);
  SessionSnapshot undo(const std::string& id);
  SessionSnapshot get(const std::string& id) const;
  void remove(const std::string& id);
  std::size_t size() const;

  // Instructions and initial images of every session; restoring replays them.
  std::string snapshot_json() const;
  void restore_json(const std::string& text);

 private:
  struct Session {
    std::string id;
    std::string checkpoint;
    std::shared_ptr<DrawerModel> model;
    std::uint64_t seed = 0;
    ImageGrid initial_image;
    ReplayState state;
    std::chrono::system_clock::time_point created_at;
    mutable FifoLock lock;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string new_id();
  std::string insert(std::shared_ptr<Session> session, const std::optional<std::string>& id);
  static SessionSnapshot snapshot_of(const Session& session);

  std::map<std::string, std::shared_ptr<DrawerModel>> models_;
  std::string default_checkpoint_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  mutable std::shared_mutex sessions_mutex_;
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_;
};

}  // namespace iterdraw

#endif  // ITERDRAW_SESSION_HPP_
