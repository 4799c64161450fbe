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

#include "iterdraw/types.hpp"

#include <sstream>

namespace iterdraw {

ImageGrid::ImageGrid(int height, int width, float fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("ImageGrid dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

void ImageGrid::check_range() const {
  for (float v : values_) {
    if (!(v >= -1.0f && v <= 1.0f)) {
      throw std::invalid_argument("ImageGrid value outside [-1, 1]");
    }
  }
}

std::string to_string(DatasetKind kind) {
  return kind == DatasetKind::kIClevr ? "iclevr" : "codraw";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "iclevr") return DatasetKind::kIClevr;
  if (name == "codraw") return DatasetKind::kCoDraw;
  throw std::invalid_argument("unknown dataset kind: " + name);
}

ClassId ClassCatalog::find(const std::string& shape,
                           const std::optional<std::string>& color) const {
  for (const auto& entry : entries) {
    if (entry.shape == shape && entry.color == color) return entry.class_id;
  }
  throw std::out_of_range("class not in catalog: " + shape + " " +
                          color.value_or(""));
}

std::string to_string(Relation relation) {
  switch (relation) {
    case Relation::kLeftOf:
      return "left-of";
    case Relation::kRightOf:
      return "right-of";
    case Relation::kInFrontOf:
      return "in-front-of";
    case Relation::kBehind:
      return "behind";
  }
  return "?";
}

Relation inverse(Relation relation) {
  switch (relation) {
    case Relation::kLeftOf:
      return Relation::kRightOf;
    case Relation::kRightOf:
      return Relation::kLeftOf;
    case Relation::kInFrontOf:
      return Relation::kBehind;
    case Relation::kBehind:
      return Relation::kInFrontOf;
  }
  return relation;
}

std::set<ClassId> SceneGraph::object_vertices() const {
  std::set<ClassId> out;
  for (ClassId v : vertices) {
    if (v != kCenterVertex) out.insert(v);
  }
  return out;
}

std::set<ClassId> DetectionSet::detected() const {
  std::set<ClassId> out;
  for (const auto& [cls, p] : presence) {
    if (p > threshold) out.insert(cls);
  }
  return out;
}

namespace {

std::string describe(const std::string& sequence_id, int turn,
                     const std::string& what) {
  std::ostringstream os;
  os << "sequence '" << sequence_id << "'";
  if (turn > 0) os << " turn " << turn;
  os << ": " << what;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::string sequence_id, int turn,
                                 const std::string& what)
    : std::runtime_error(describe(sequence_id, turn, what)),
      sequence_id_(std::move(sequence_id)),
      turn_(turn) {}

}  // namespace iterdraw
