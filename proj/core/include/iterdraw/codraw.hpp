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

#ifndef ITERDRAW_CODRAW_HPP_
#define ITERDRAW_CODRAW_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "iterdraw/dataset_io.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw::codraw {

inline constexpr const char* kDelimiterToken = "<teller-drawer>";

struct RawTurn {
  std::vector<std::string> teller_msgs;
  std::vector<std::string> drawer_msgs;
  std::vector<ObjectSpec> objects;
  std::filesystem::path image_path;
};

struct CollapseResult {
  std::vector<RawTurn> turns;
  std::vector<std::string> warnings;
};

// Merges runs of consecutive turns whose object count does not change.
// A run keeps the messages of all its turns, in order, and the objects and
// image of its last turn. A leading run with an empty canvas is folded into
// the next run. If the count never changes the result is empty and carries
// a warning.
CollapseResult collapse_turns(const std::vector<RawTurn>& raw);

// Spelling-correction hook applied to each utterance before tokenization.
class TextNormalizer {
 public:
  virtual ~TextNormalizer() = default;
  virtual std::string normalize(std::string_view text) const = 0;
};

class IdentityNormalizer final : public TextNormalizer {
 public:
  std::string normalize(std::string_view text) const override { return std::string(text); }
};

std::vector<std::string> compose_instruction(const std::vector<std::string>& teller_msgs,
                                             const std::vector<std::string>& drawer_msgs,
                                             const TextNormalizer& normalizer = IdentityNormalizer());

struct IngestOptions {
  std::filesystem::path raw_json;
  std::filesystem::path images_dir;
  int image_side = 128;
  std::shared_ptr<const TextNormalizer> normalizer = std::make_shared<IdentityNormalizer>();
};

struct IngestResult {
  Dataset dataset;
  std::size_t skipped_scenes = 0;
  std::vector<std::string> warnings;
};

// Reads scenes from the dialog JSON and the per-turn renders. See README for
// the accepted record layout.
IngestResult ingest(const IngestOptions& options);

// "train_00012" -> "train", "val_00003" -> "valid", "test_..." -> "test".
std::string split_from_scene_id(const std::string& scene_id);

}  // namespace iterdraw::codraw

#endif  // ITERDRAW_CODRAW_HPP_
