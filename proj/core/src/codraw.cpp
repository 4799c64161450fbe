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

#include "iterdraw/codraw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "iterdraw/image_io.hpp"
#include "iterdraw/tokenize.hpp"
#include "json.hpp"

namespace iterdraw::codraw {

namespace fs = std::filesystem;
using nlohmann::json;

CollapseResult collapse_turns(const std::vector<RawTurn>& raw) {
  if (raw.empty()) throw std::invalid_argument("collapse_turns: no turns");
  CollapseResult result;

  std::vector<RawTurn> runs;
  for (const auto& turn : raw) {
    if (!runs.empty() && runs.back().objects.size() == turn.objects.size()) {
      auto& run = runs.back();
      run.teller_msgs.insert(run.teller_msgs.end(), turn.teller_msgs.begin(), turn.teller_msgs.end());
      run.drawer_msgs.insert(run.drawer_msgs.end(), turn.drawer_msgs.begin(), turn.drawer_msgs.end());
      run.objects = turn.objects;
      run.image_path = turn.image_path;
    } else {
      runs.push_back(turn);
    }
  }

  if (runs.size() == 1) {
    result.warnings.push_back("object count never changes (" +
                              std::to_string(runs.front().objects.size()) +
                              " objects); sequence dropped");
    return result;
  }

  if (runs.front().objects.empty()) {
    // Talk before anything was drawn belongs to the first real modification.
    auto& next = runs[1];
    next.teller_msgs.insert(next.teller_msgs.begin(), runs[0].teller_msgs.begin(),
                            runs[0].teller_msgs.end());
    next.drawer_msgs.insert(next.drawer_msgs.begin(), runs[0].drawer_msgs.begin(),
                            runs[0].drawer_msgs.end());
    runs.erase(runs.begin());
  }
  result.turns = std::move(runs);
  return result;
}

std::vector<std::string> compose_instruction(const std::vector<std::string>& teller_msgs,
                                             const std::vector<std::string>& drawer_msgs,
                                             const TextNormalizer& normalizer) {
  auto side = [&](const std::vector<std::string>& msgs) {
    std::vector<std::string> tokens;
    for (const auto& msg : msgs) {
      auto part = tokenize(normalizer.normalize(msg));
      tokens.insert(tokens.end(), part.begin(), part.end());
    }
    return tokens;
  };
  auto tokens = side(teller_msgs);
  tokens.emplace_back(kDelimiterToken);
  const auto drawer = side(drawer_msgs);
  tokens.insert(tokens.end(), drawer.begin(), drawer.end());
  return tokens;
}

std::string split_from_scene_id(const std::string& scene_id) {
  if (scene_id.rfind("train", 0) == 0) return "train";
  if (scene_id.rfind("val", 0) == 0) return "valid";
  if (scene_id.rfind("test", 0) == 0) return "test";
  return "train";
}

namespace {

std::vector<std::string> messages(const json& turn, const char* key) {
  std::vector<std::string> out;
  if (!turn.contains(key)) return out;
  const auto& value = turn.at(key);
  if (value.is_string()) {
    if (!value.get<std::string>().empty()) out.push_back(value.get<std::string>());
  } else {
    for (const auto& msg : value) out.push_back(msg.get<std::string>());
  }
  return out;
}

ImageGrid load_background(const fs::path& images_dir, const std::string& scene_id, int side) {
  const auto own = images_dir / scene_id / "bg.png";
  const auto shared = images_dir / "background.png";
  if (fs::exists(own)) return resize_image(read_png(own), side, side);
  if (fs::exists(shared)) return resize_image(read_png(shared), side, side);
  throw DatasetIoError("no background image for scene " + scene_id + " (looked for " +
                       own.string() + " and " + shared.string() + ")");
}

}  // namespace

IngestResult ingest(const IngestOptions& options) {
  std::ifstream in(options.raw_json);
  if (!in) throw DatasetIoError("cannot open " + options.raw_json.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetIoError(options.raw_json.string() + ": " + e.what());
  }
  const json& scenes = doc.contains("data") ? doc.at("data") : doc;
  const float scale_x = static_cast<float>(options.image_side) / doc.value("canvas_width", static_cast<float>(options.image_side));
  const float scale_y = static_cast<float>(options.image_side) / doc.value("canvas_height", static_cast<float>(options.image_side));

  IngestResult result;
  auto& catalog = result.dataset.catalog;
  catalog.kind = DatasetKind::kCoDraw;
  std::set<std::string> names;
  for (const auto& [scene_id, scene] : scenes.items()) {
    for (const auto& turn : scene.at("dialog")) {
      for (const auto& object : turn.value("objects", json::array())) {
        names.insert(object.at("name").get<std::string>());
      }
    }
  }
  for (const auto& name : names) {
    catalog.entries.push_back({static_cast<ClassId>(catalog.entries.size()), name, std::nullopt});
  }

  const float max_coord = std::nextafter(static_cast<float>(options.image_side), 0.0f);
  for (const auto& [scene_id, scene] : scenes.items()) {
    std::vector<RawTurn> raw;
    int k = 0;
    for (const auto& turn : scene.at("dialog")) {
      ++k;
      RawTurn item;
      item.teller_msgs = messages(turn, "msg_t");
      item.drawer_msgs = messages(turn, "msg_d");
      for (const auto& object : turn.value("objects", json::array())) {
        ObjectSpec spec;
        spec.shape = object.at("name").get<std::string>();
        spec.class_id = catalog.find(spec.shape, std::nullopt);
        spec.centroid = {std::clamp(object.at("x").get<float>() * scale_x, 0.0f, max_coord),
                         std::clamp(object.at("y").get<float>() * scale_y, 0.0f, max_coord)};
        item.objects.push_back(std::move(spec));
      }
      item.image_path = options.images_dir / scene_id / ("turn" + std::to_string(k) + ".png");
      raw.push_back(std::move(item));
    }
    if (raw.empty()) {
      ++result.skipped_scenes;
      result.warnings.push_back(scene_id + ": no dialog turns");
      continue;
    }
    auto collapsed = collapse_turns(raw);
    for (const auto& warning : collapsed.warnings) result.warnings.push_back(scene_id + ": " + warning);
    if (collapsed.turns.empty()) {
      ++result.skipped_scenes;
      continue;
    }

    SceneSequence sequence;
    sequence.id = scene_id;
    sequence.split = scene.contains("split") ? scene.at("split").get<std::string>()
                                             : split_from_scene_id(scene_id);
    sequence.background = load_background(options.images_dir, scene_id, options.image_side);
    int index = 0;
    for (const auto& turn : collapsed.turns) {
      Turn out;
      out.index = ++index;
      out.instruction_tokens = compose_instruction(turn.teller_msgs, turn.drawer_msgs, *options.normalizer);
      out.instruction = join_tokens(out.instruction_tokens);
      out.scene = turn.objects;
      out.image = resize_image(read_png(turn.image_path), options.image_side, options.image_side);
      sequence.turns.push_back(std::move(out));
    }
    validate_sequence(sequence, catalog);
    result.dataset.sequences.push_back(std::move(sequence));
  }
  return result;
}

}  // namespace iterdraw::codraw
