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

#ifndef ITERDRAW_TYPES_HPP_
#define ITERDRAW_TYPES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace iterdraw {

using ClassId = int;

struct Point2 {
  float x = 0.0f;
  float y = 0.0f;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// One scene object. For i-CLEVR `shape` is cube/sphere/cylinder and `color`
// is set; for CoDraw `shape` holds the clip-art name and `color` is empty.
struct ObjectSpec {
  ClassId class_id = 0;
  std::string shape;
  std::optional<std::string> color;
  Point2 centroid;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

// HWC float image with values in [-1, 1].
class ImageGrid {
 public:
  static constexpr int kChannels = 3;

  ImageGrid() = default;
  ImageGrid(int height, int width, float fill = -1.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return values_.empty(); }

  float& at(int y, int x, int c) { return values_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return values_[index(y, x, c)]; }

  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }

  // Throws std::invalid_argument if any value is outside [-1, 1].
  void check_range() const;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

struct Turn {
  int index = 1;
  std::string instruction;
  std::vector<std::string> instruction_tokens;
  std::vector<ObjectSpec> scene;
  ImageGrid image;

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class DatasetKind { kIClevr, kCoDraw };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& name);

struct SceneSequence {
  std::string id;
  std::string split = "train";
  std::vector<Turn> turns;
  ImageGrid background;

  friend bool operator==(const SceneSequence&, const SceneSequence&) = default;
};

struct CatalogEntry {
  ClassId class_id = 0;
  std::string shape;
  std::optional<std::string> color;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

inline constexpr int kIClevrTurns = 5;

struct ClassCatalog {
  DatasetKind kind = DatasetKind::kIClevr;
  std::vector<CatalogEntry> entries;
  // i-CLEVR sequences all have this many turns.
  int turns_per_sequence = kIClevrTurns;

  std::size_t size() const { return entries.size(); }
  // Lookup by (shape, color); throws std::out_of_range when absent.
  ClassId find(const std::string& shape,
               const std::optional<std::string>& color) const;

  friend bool operator==(const ClassCatalog&, const ClassCatalog&) = default;
};

struct Dataset {
  ClassCatalog catalog;
  std::vector<SceneSequence> sequences;
};

enum class Relation { kLeftOf, kRightOf, kInFrontOf, kBehind };

std::string to_string(Relation relation);
Relation inverse(Relation relation);

inline constexpr ClassId kCenterVertex = -1;

struct SceneEdge {
  ClassId src = 0;
  ClassId dst = 0;
  Relation label = Relation::kLeftOf;

  friend auto operator<=>(const SceneEdge&, const SceneEdge&) = default;
};

struct SceneGraph {
  std::set<ClassId> vertices;
  std::set<SceneEdge> edges;

  std::set<ClassId> object_vertices() const;
};

struct DetectionSet {
  std::map<ClassId, float> presence;
  std::map<ClassId, Point2> centroids;
  float threshold = 0.5f;

  // Classes whose presence probability exceeds the threshold.
  std::set<ClassId> detected() const;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string sequence_id, int turn, const std::string& what);

  const std::string& sequence_id() const { return sequence_id_; }
  // 0 when the violation is not tied to one turn.
  int turn() const { return turn_; }

 private:
  std::string sequence_id_;
  int turn_;
};

class DatasetIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iterdraw

#endif  // ITERDRAW_TYPES_HPP_
