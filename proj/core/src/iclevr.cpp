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

#include "iterdraw/iclevr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iterdraw/image_io.hpp"
#include "iterdraw/tokenize.hpp"

namespace iterdraw::iclevr {

std::vector<NamedColor> default_colors() {
  return {{"cyan", {41, 208, 208}},  {"red", {173, 35, 35}},   {"purple", {129, 38, 192}},
          {"yellow", {255, 238, 51}}, {"blue", {42, 75, 215}},  {"green", {29, 105, 20}},
          {"gray", {87, 87, 87}},     {"brown", {129, 74, 25}}};
}

void GenConfig::validate() const {
  if (shapes.empty() || colors.empty()) throw std::invalid_argument("shapes and colors must be non-empty");
  if (shapes.size() * colors.size() < static_cast<std::size_t>(turns_per_sequence)) {
    throw std::invalid_argument("fewer (shape, color) classes than turns per sequence");
  }
  if (turns_per_sequence < 1) throw std::invalid_argument("turns_per_sequence must be >= 1");
  if (min_distance < 1) throw std::invalid_argument("min_distance must be >= 1");
  if (margin < 0) throw std::invalid_argument("margin must be >= 0");
  if (canvas_side <= 2 * margin) throw std::invalid_argument("margins leave no room on the canvas");
  if (glyph_half_size < 1) throw std::invalid_argument("glyph_half_size must be >= 1");
  if (scale <= 0.0) throw std::invalid_argument("scale must be positive");
  if (max_placement_attempts < 1) throw std::invalid_argument("max_placement_attempts must be >= 1");
}

std::array<int, 3> GenConfig::scaled_split_sizes() const {
  std::array<int, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = static_cast<int>(std::lround(split_sizes[i] * scale));
  }
  return out;
}

PairRelation derive_relations(const ObjectSpec& new_obj, const ObjectSpec& ref) {
  if (new_obj.centroid.x == ref.centroid.x || new_obj.centroid.y == ref.centroid.y) {
    throw RelationTieError("objects share a coordinate; relation is undefined");
  }
  return {new_obj.centroid.x < ref.centroid.x ? Horizontal::kLeft : Horizontal::kRight,
          new_obj.centroid.y < ref.centroid.y ? Depth::kBehind : Depth::kInFront};
}

RefRelation full_relation(const ObjectSpec& new_obj, const ObjectSpec& ref) {
  const auto rel = derive_relations(new_obj, ref);
  return {ref, rel.horizontal, rel.depth};
}

namespace {

std::string describe(const ObjectSpec& object) {
  return object.color ? *object.color + " " + object.shape : object.shape;
}

std::string depth_words(Depth depth) { return depth == Depth::kBehind ? "behind" : "in front of"; }

std::string side_word(Horizontal h) { return h == Horizontal::kLeft ? "left" : "right"; }

std::string relation_clause(const RefRelation& ref, const std::string& name) {
  if (ref.depth && ref.horizontal) {
    return depth_words(*ref.depth) + " " + name + " on the " + side_word(*ref.horizontal);
  }
  if (ref.depth) return depth_words(*ref.depth) + " " + name;
  if (ref.horizontal) return "on the " + side_word(*ref.horizontal) + " of " + name;
  throw std::invalid_argument("reference carries no relation");
}

}  // namespace

std::string render_instruction(int turn_index, const ObjectSpec& new_obj,
                               const std::vector<RefRelation>& refs) {
  const std::size_t expected = turn_index <= 1 ? 0 : (turn_index == 2 ? 1 : 2);
  if (turn_index < 1 || refs.size() != expected) {
    throw std::invalid_argument("turn " + std::to_string(turn_index) + " takes " +
                                std::to_string(expected) + " references, got " +
                                std::to_string(refs.size()));
  }
  std::string out = "Add a " + describe(new_obj);
  if (turn_index == 1) return out + " at the center";
  out += " " + relation_clause(refs[0], "it");
  if (turn_index >= 3) out += " and " + relation_clause(refs[1], "the " + describe(refs[1].object));
  return out;
}

ClassCatalog make_catalog(const GenConfig& config) {
  ClassCatalog catalog;
  catalog.kind = DatasetKind::kIClevr;
  catalog.turns_per_sequence = config.turns_per_sequence;
  for (std::size_t s = 0; s < config.shapes.size(); ++s) {
    for (std::size_t c = 0; c < config.colors.size(); ++c) {
      catalog.entries.push_back({static_cast<ClassId>(s * config.colors.size() + c),
                                 config.shapes[s], config.colors[c].name});
    }
  }
  return catalog;
}

namespace {

std::array<float, 3> to_unit(const std::array<std::uint8_t, 3>& rgb) {
  return {dequantize_pixel(rgb[0]), dequantize_pixel(rgb[1]), dequantize_pixel(rgb[2])};
}

std::array<std::uint8_t, 3> lighten(const std::array<std::uint8_t, 3>& rgb) {
  std::array<std::uint8_t, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = static_cast<std::uint8_t>(rgb[i] + (255 - rgb[i]) / 2);
  return out;
}

const NamedColor& color_for(const ObjectSpec& object, const GenConfig& config) {
  for (const auto& color : config.colors) {
    if (object.color && color.name == *object.color) return color;
  }
  throw std::invalid_argument("unknown color for object " + describe(object));
}

template <typename Inside>
void fill(ImageGrid& image, int cx, int cy, int extent, const std::array<float, 3>& rgb,
          Inside inside) {
  const int y0 = std::max(0, cy - extent);
  const int y1 = std::min(image.height() - 1, cy + extent);
  const int x0 = std::max(0, cx - extent);
  const int x1 = std::min(image.width() - 1, cx + extent);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!inside(x - cx, y - cy)) continue;
      for (int c = 0; c < 3; ++c) image.at(y, x, c) = rgb[static_cast<std::size_t>(c)];
    }
  }
}

void draw_glyph(ImageGrid& image, const ObjectSpec& object, const GenConfig& config) {
  const int cx = static_cast<int>(std::lround(object.centroid.x));
  const int cy = static_cast<int>(std::lround(object.centroid.y));
  const int g = config.glyph_half_size;
  const auto& color = color_for(object, config);
  const auto body = to_unit(color.rgb);
  if (object.shape == "cube") {
    fill(image, cx, cy, g, body, [&](int, int) { return true; });
  } else if (object.shape == "sphere") {
    fill(image, cx, cy, g, body, [&](int dx, int dy) { return dx * dx + dy * dy <= g * g; });
  } else if (object.shape == "cylinder") {
    const double half_width = 0.75 * g;
    const double cap_center = -0.5 * g;
    const double cap_ry = 0.35 * g;
    fill(image, cx, cy, g, body, [&](int dx, int dy) {
      return std::abs(dx) <= half_width && dy >= cap_center && dy <= g;
    });
    const auto cap = to_unit(lighten(color.rgb));
    fill(image, cx, cy, g, cap, [&](int dx, int dy) {
      const double ex = dx / half_width;
      const double ey = (dy - cap_center) / cap_ry;
      return ex * ex + ey * ey <= 1.0;
    });
  } else {
    throw std::invalid_argument("unknown shape: " + object.shape);
  }
}

}  // namespace

ImageGrid rasterize_scene(const std::vector<ObjectSpec>& scene, const GenConfig& config) {
  ImageGrid image(config.canvas_side, config.canvas_side);
  const auto bg = to_unit(config.background_rgb);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) image.at(y, x, c) = bg[static_cast<std::size_t>(c)];
    }
  }
  // Painter's algorithm: farther objects (smaller y) first.
  std::vector<const ObjectSpec*> order;
  for (const auto& object : scene) order.push_back(&object);
  std::stable_sort(order.begin(), order.end(), [](const ObjectSpec* a, const ObjectSpec* b) {
    return a->centroid.y < b->centroid.y;
  });
  for (const auto* object : order) draw_glyph(image, *object, config);
  return image;
}

namespace {

bool placement_ok(const Point2& candidate, const std::vector<ObjectSpec>& placed, int min_distance) {
  for (const auto& other : placed) {
    const double dx = candidate.x - other.centroid.x;
    const double dy = candidate.y - other.centroid.y;
    if (dx * dx + dy * dy < static_cast<double>(min_distance) * min_distance) return false;
    if (candidate.x == other.centroid.x || candidate.y == other.centroid.y) return false;
  }
  return true;
}

}  // namespace

SceneSequence sample_scene_sequence(const GenConfig& config, std::mt19937_64& rng) {
  config.validate();
  const auto catalog = make_catalog(config);

  std::vector<std::size_t> classes(catalog.size());
  std::iota(classes.begin(), classes.end(), std::size_t{0});
  // Fisher-Yates with uniform_int_distribution keeps results stable across
  // standard libraries that implement std::shuffle differently.
  for (std::size_t i = classes.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(classes[i - 1], classes[pick(rng)]);
  }

  SceneSequence sequence;
  sequence.background = rasterize_scene({}, config);
  std::uniform_int_distribution<int> coord(config.margin, config.canvas_side - 1 - config.margin);
  std::vector<ObjectSpec> placed;
  for (int t = 1; t <= config.turns_per_sequence; ++t) {
    const auto& entry = catalog.entries[classes[static_cast<std::size_t>(t - 1)]];
    ObjectSpec object{entry.class_id, entry.shape, entry.color, {}};
    if (t == 1) {
      const float center = static_cast<float>(config.canvas_side) / 2.0f;
      object.centroid = {center, center};
    } else {
      bool found = false;
      for (int attempt = 0; attempt < config.max_placement_attempts && !found; ++attempt) {
        const Point2 candidate{static_cast<float>(coord(rng)), static_cast<float>(coord(rng))};
        if (placement_ok(candidate, placed, config.min_distance)) {
          object.centroid = candidate;
          found = true;
        }
      }
      if (!found) {
        throw PlacementError("object placement failed after " +
                             std::to_string(config.max_placement_attempts) +
                             " attempts; constraints unsatisfiable for this canvas");
      }
    }

    std::vector<RefRelation> refs;
    if (t >= 2) refs.push_back(full_relation(object, placed.back()));
    if (t >= 3) {
      std::uniform_int_distribution<std::size_t> other(0, placed.size() - 2);
      refs.push_back(full_relation(object, placed[other(rng)]));
    }

    Turn turn;
    turn.index = t;
    turn.instruction = render_instruction(t, object, refs);
    turn.instruction_tokens = tokenize(turn.instruction);
    placed.push_back(object);
    turn.scene = placed;
    turn.image = rasterize_scene(placed, config);
    sequence.turns.push_back(std::move(turn));
  }
  return sequence;
}

std::uint64_t sequence_seed(std::uint64_t base_seed, int split_index, int sequence_index) {
  // splitmix64 finalizer over a combined key.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t split_seed = mix(base_seed ^ mix(static_cast<std::uint64_t>(split_index) + 1));
  return mix(split_seed + static_cast<std::uint64_t>(sequence_index));
}

Dataset generate(const GenConfig& config) {
  config.validate();
  static const std::array<const char*, 3> kSplitNames = {"train", "valid", "test"};
  Dataset dataset;
  dataset.catalog = make_catalog(config);
  const auto sizes = config.scaled_split_sizes();
  for (int split = 0; split < 3; ++split) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(split)]; ++i) {
      std::mt19937_64 rng(sequence_seed(config.seed, split, i));
      auto sequence = sample_scene_sequence(config, rng);
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%05d", kSplitNames[static_cast<std::size_t>(split)], i);
      sequence.id = id;
      sequence.split = kSplitNames[static_cast<std::size_t>(split)];
      dataset.sequences.push_back(std::move(sequence));
    }
  }
  return dataset;
}

ManifestSummary generate_dataset(const GenConfig& config, const std::filesystem::path& out) {
  return write_dataset(generate(config), out);
}

}  // namespace iterdraw::iclevr
