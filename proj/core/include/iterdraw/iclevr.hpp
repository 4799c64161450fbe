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

#ifndef ITERDRAW_ICLEVR_HPP_
#define ITERDRAW_ICLEVR_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdraw/dataset_io.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw::iclevr {

struct NamedColor {
  std::string name;
  std::array<std::uint8_t, 3> rgb;
};

std::vector<NamedColor> default_colors();

struct GenConfig {
  int canvas_side = 128;
  int min_distance = 20;
  int margin = 12;
  // Half the side of a cube glyph; spheres and cylinders use the same extent.
  int glyph_half_size = 8;
  std::vector<std::string> shapes = {"cube", "sphere", "cylinder"};
  std::vector<NamedColor> colors = default_colors();
  std::array<std::uint8_t, 3> background_rgb = {24, 24, 28};
  int turns_per_sequence = kIClevrTurns;
  std::array<int, 3> split_sizes = {6000, 2000, 2000};
  double scale = 1.0;
  std::uint64_t seed = 0;
  int max_placement_attempts = 1000;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  // Split sizes after applying `scale`, rounded to nearest.
  std::array<int, 3> scaled_split_sizes() const;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RelationTieError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Horizontal { kLeft, kRight };
enum class Depth { kBehind, kInFront };

struct PairRelation {
  Horizontal horizontal;
  Depth depth;

  friend bool operator==(const PairRelation&, const PairRelation&) = default;
};

// Position of `new_obj` relative to `ref`. Smaller y is farther from the
// camera. Throws RelationTieError on an exact tie on either axis.
PairRelation derive_relations(const ObjectSpec& new_obj, const ObjectSpec& ref);

// A referenced object plus the words used to relate the new object to it.
// Either component may be left out of the sentence.
struct RefRelation {
  ObjectSpec object;
  std::optional<Horizontal> horizontal;
  std::optional<Depth> depth;
};

RefRelation full_relation(const ObjectSpec& new_obj, const ObjectSpec& ref);

// Turn 1 takes no refs, turn 2 one ref ("it"), later turns two refs: the
// most recent object ("it") then one named by its attributes.
std::string render_instruction(int turn_index, const ObjectSpec& new_obj,
                               const std::vector<RefRelation>& refs);

ClassCatalog make_catalog(const GenConfig& config);

ImageGrid rasterize_scene(const std::vector<ObjectSpec>& scene, const GenConfig& config);

SceneSequence sample_scene_sequence(const GenConfig& config, std::mt19937_64& rng);

std::uint64_t sequence_seed(std::uint64_t base_seed, int split_index, int sequence_index);

// Builds all splits in memory; sequence ids are "<split>_<nnnnn>".
Dataset generate(const GenConfig& config);

ManifestSummary generate_dataset(const GenConfig& config, const std::filesystem::path& out);

}  // namespace iterdraw::iclevr

#endif  // ITERDRAW_ICLEVR_HPP_
