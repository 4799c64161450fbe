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

#include "iterdraw/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <string>

#include "iterdraw/image_io.hpp"
#include "json.hpp"

namespace iterdraw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCatalogFile = "catalog.json";
constexpr const char* kIndexFile = "index.jsonl";

std::string background_path(const std::string& id) { return "images/" + id + "/bg.png"; }

std::string turn_path(const std::string& id, int k) {
  return "images/" + id + "/turn" + std::to_string(k) + ".png";
}

json catalog_to_json(const ClassCatalog& catalog) {
  json classes = json::array();
  for (const auto& entry : catalog.entries) {
    json item = {{"class_id", entry.class_id}, {"shape", entry.shape}};
    if (entry.color) item["color"] = *entry.color;
    classes.push_back(std::move(item));
  }
  json out = {{"dataset", to_string(catalog.kind)}, {"classes", std::move(classes)}};
  if (catalog.kind == DatasetKind::kIClevr) {
    out["turns_per_sequence"] = catalog.turns_per_sequence;
  }
  return out;
}

ClassCatalog catalog_from_json(const json& doc) {
  ClassCatalog catalog;
  catalog.kind = dataset_kind_from_string(doc.at("dataset").get<std::string>());
  catalog.turns_per_sequence = doc.value("turns_per_sequence", kIClevrTurns);
  for (const auto& item : doc.at("classes")) {
    CatalogEntry entry;
    entry.class_id = item.at("class_id").get<ClassId>();
    entry.shape = item.at("shape").get<std::string>();
    if (item.contains("color")) entry.color = item.at("color").get<std::string>();
    catalog.entries.push_back(std::move(entry));
  }
  return catalog;
}

json object_to_json(const ObjectSpec& object) {
  json out = {{"class_id", object.class_id},
              {"shape", object.shape},
              {"x", object.centroid.x},
              {"y", object.centroid.y}};
  if (object.color) out["color"] = *object.color;
  return out;
}

ObjectSpec object_from_json(const json& doc) {
  ObjectSpec object;
  object.class_id = doc.at("class_id").get<ClassId>();
  object.shape = doc.at("shape").get<std::string>();
  if (doc.contains("color")) object.color = doc.at("color").get<std::string>();
  object.centroid = {doc.at("x").get<float>(), doc.at("y").get<float>()};
  return object;
}

bool same_object(const ObjectSpec& a, const ObjectSpec& b) { return a == b; }

}  // namespace

void validate_sequence(const SceneSequence& sequence, const ClassCatalog& catalog) {
  const auto& id = sequence.id;
  if (sequence.turns.empty()) throw ValidationError(id, 0, "sequence has no turns");
  if (sequence.background.empty()) throw ValidationError(id, 0, "missing background image");
  const bool iclevr = catalog.kind == DatasetKind::kIClevr;
  if (iclevr && static_cast<int>(sequence.turns.size()) != catalog.turns_per_sequence) {
    throw ValidationError(id, 0,
                          "expected " + std::to_string(catalog.turns_per_sequence) +
                              " turns, found " + std::to_string(sequence.turns.size()));
  }
  const int height = sequence.background.height();
  const int width = sequence.background.width();
  for (std::size_t i = 0; i < sequence.turns.size(); ++i) {
    const Turn& turn = sequence.turns[i];
    const int t = static_cast<int>(i) + 1;
    if (turn.index != t) {
      throw ValidationError(id, t, "turn index " + std::to_string(turn.index) + " out of order");
    }
    if (turn.instruction_tokens.empty()) throw ValidationError(id, t, "empty instruction");
    if (turn.image.height() != height || turn.image.width() != width) {
      throw ValidationError(id, t, "image size differs from background");
    }
    std::set<ClassId> seen;
    for (const auto& object : turn.scene) {
      if (object.class_id < 0 || static_cast<std::size_t>(object.class_id) >= catalog.size()) {
        throw ValidationError(id, t, "class id " + std::to_string(object.class_id) +
                                         " outside catalog");
      }
      const auto& entry = catalog.entries[static_cast<std::size_t>(object.class_id)];
      if (iclevr && (entry.shape != object.shape || entry.color != object.color)) {
        throw ValidationError(id, t, "class id does not match (shape, color)");
      }
      if (!(object.centroid.x >= 0.0f && object.centroid.x < static_cast<float>(width) &&
            object.centroid.y >= 0.0f && object.centroid.y < static_cast<float>(height))) {
        throw ValidationError(id, t, "centroid outside canvas");
      }
      if (!seen.insert(object.class_id).second) {
        throw ValidationError(id, t, "class appears twice in one scene");
      }
    }
    if (iclevr) {
      if (static_cast<int>(turn.scene.size()) != t) {
        throw ValidationError(id, t, "expected " + std::to_string(t) + " objects, found " +
                                         std::to_string(turn.scene.size()));
      }
      if (i > 0) {
        for (const auto& previous : sequence.turns[i - 1].scene) {
          const bool kept = std::any_of(turn.scene.begin(), turn.scene.end(),
                                        [&](const ObjectSpec& o) { return same_object(o, previous); });
          if (!kept) throw ValidationError(id, t, "object set is not monotone");
        }
      }
    }
  }
}

ManifestSummary write_dataset(const Dataset& dataset, const fs::path& root) {
  if (dataset.sequences.empty()) throw DatasetIoError("refusing to write an empty dataset");
  std::set<std::string> ids;
  for (const auto& sequence : dataset.sequences) {
    if (!ids.insert(sequence.id).second) {
      throw ValidationError(sequence.id, 0, "duplicate sequence id");
    }
  }

  std::error_code ec;
  fs::create_directories(root / "images", ec);
  if (ec) throw DatasetIoError("cannot create " + (root / "images").string() + ": " + ec.message());

  {
    std::ofstream catalog_out(root / kCatalogFile);
    if (!catalog_out) throw DatasetIoError("cannot write " + (root / kCatalogFile).string());
    catalog_out << catalog_to_json(dataset.catalog).dump(2) << "\n";
  }

  ManifestSummary summary;
  summary.index_path = root / kIndexFile;
  std::ofstream index(summary.index_path);
  if (!index) throw DatasetIoError("cannot write " + summary.index_path.string());

  for (const auto& sequence : dataset.sequences) {
    fs::create_directories(root / "images" / sequence.id, ec);
    if (ec) throw DatasetIoError("cannot create image directory for " + sequence.id);
    write_png(sequence.background, root / background_path(sequence.id));
    ++summary.num_background_images;

    json turns = json::array();
    for (const auto& turn : sequence.turns) {
      json objects = json::array();
      for (const auto& object : turn.scene) objects.push_back(object_to_json(object));
      const auto image = turn_path(sequence.id, turn.index);
      write_png(turn.image, root / image);
      ++summary.num_turn_images;
      turns.push_back({{"index", turn.index},
                       {"instruction", turn.instruction},
                       {"tokens", turn.instruction_tokens},
                       {"objects", std::move(objects)},
                       {"image", image}});
    }
    json record = {{"id", sequence.id},
                   {"split", sequence.split},
                   {"background", background_path(sequence.id)},
                   {"turns", std::move(turns)}};
    index << record.dump() << "\n";
    ++summary.num_sequences;
  }
  if (!index) throw DatasetIoError("failed writing " + summary.index_path.string());
  return summary;
}

Dataset read_dataset(const fs::path& root) {
  Dataset dataset;
  {
    std::ifstream catalog_in(root / kCatalogFile);
    if (!catalog_in) throw DatasetIoError("missing " + (root / kCatalogFile).string());
    try {
      dataset.catalog = catalog_from_json(json::parse(catalog_in));
    } catch (const json::exception& e) {
      throw DatasetIoError("malformed catalog.json: " + std::string(e.what()));
    }
  }

  std::ifstream index(root / kIndexFile);
  if (!index) throw DatasetIoError("missing " + (root / kIndexFile).string());
  std::string line;
  std::size_t line_number = 0;
  std::set<std::string> ids;
  while (std::getline(index, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SceneSequence sequence;
    json record;
    try {
      record = json::parse(line);
      sequence.id = record.at("id").get<std::string>();
      sequence.split = record.value("split", std::string("train"));
    } catch (const json::exception& e) {
      throw DatasetIoError("index.jsonl line " + std::to_string(line_number) +
                           ": malformed record: " + e.what());
    }
    if (!ids.insert(sequence.id).second) {
      throw ValidationError(sequence.id, 0, "duplicate sequence id");
    }
    try {
      sequence.background = read_png(root / record.at("background").get<std::string>());
      for (const auto& item : record.at("turns")) {
        Turn turn;
        turn.index = item.at("index").get<int>();
        turn.instruction = item.value("instruction", std::string());
        turn.instruction_tokens = item.at("tokens").get<std::vector<std::string>>();
        for (const auto& object : item.at("objects")) turn.scene.push_back(object_from_json(object));
        turn.image = read_png(root / item.at("image").get<std::string>());
        sequence.turns.push_back(std::move(turn));
      }
    } catch (const json::exception& e) {
      throw DatasetIoError("index.jsonl line " + std::to_string(line_number) +
                           ": malformed record: " + e.what());
    }
    validate_sequence(sequence, dataset.catalog);
    dataset.sequences.push_back(std::move(sequence));
  }
  return dataset;
}

}  // namespace iterdraw
