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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "iterdraw/dataset_io.hpp"
#include "iterdraw/iclevr.hpp"
#include "iclevr_oracle.hpp"
#include "test_util.hpp"

namespace iterdraw::iclevr {
namespace {

ObjectSpec object(const std::string& color, const std::string& shape, float x, float y, ClassId id = 0) {
  return ObjectSpec{id, shape, color, Point2{x, y}};
}

using testing::check_sequence;

TEST(GenConfig, PigeonholeIsRejected) {
  GenConfig config;
  config.shapes = {"cube"};
  config.colors.resize(3);
  EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(GenConfig, InvalidDistancesAndMargins) {
  GenConfig config;
  config.min_distance = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = GenConfig{};
  config.margin = -1;
  EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(GenConfig, ScaledSplitSizes) {
  GenConfig config;
  config.scale = 0.01;
  EXPECT_EQ(config.scaled_split_sizes(), (std::array<int, 3>{60, 20, 20}));
  config.scale = 1.0;
  EXPECT_EQ(config.scaled_split_sizes(), (std::array<int, 3>{6000, 2000, 2000}));
}

TEST(Catalog, TwentyFourClassesFormABijection) {
  const auto catalog = make_catalog(GenConfig{});
  ASSERT_EQ(catalog.size(), 24u);
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    EXPECT_EQ(catalog.entries[i].class_id, static_cast<ClassId>(i));
    pairs.insert({catalog.entries[i].shape, *catalog.entries[i].color});
    EXPECT_EQ(catalog.find(catalog.entries[i].shape, catalog.entries[i].color), static_cast<ClassId>(i));
  }
  EXPECT_EQ(pairs.size(), 24u);
}

TEST(DeriveRelations, Examples) {
  EXPECT_EQ(derive_relations(object("red", "cube", 20, 20), object("red", "cube", 100, 100)),
            (PairRelation{Horizontal::kLeft, Depth::kBehind}));
  EXPECT_EQ(derive_relations(object("red", "cube", 100, 100), object("red", "cube", 20, 20)),
            (PairRelation{Horizontal::kRight, Depth::kInFront}));
  EXPECT_THROW(derive_relations(object("red", "cube", 20, 50), object("red", "cube", 20, 60)), RelationTieError);
  EXPECT_THROW(derive_relations(object("red", "cube", 10, 60), object("red", "cube", 20, 60)), RelationTieError);
}

TEST(DeriveRelations, AgreesWithComparatorOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coord(0, 127);
  int checked = 0;
  while (checked < 10000) {
    const auto a = object("red", "cube", static_cast<float>(coord(rng)), static_cast<float>(coord(rng)));
    const auto b = object("blue", "cube", static_cast<float>(coord(rng)), static_cast<float>(coord(rng)));
    if (a.centroid.x == b.centroid.x || a.centroid.y == b.centroid.y) {
      EXPECT_THROW(derive_relations(a, b), RelationTieError);
      continue;
    }
    const auto r = derive_relations(a, b);
    EXPECT_EQ(r.horizontal == Horizontal::kLeft, a.centroid.x < b.centroid.x);
    EXPECT_EQ(r.depth == Depth::kBehind, a.centroid.y < b.centroid.y);
    ++checked;
  }
}

TEST(RenderInstruction, TemplateExamples) {
  const auto cyan_cylinder = object("cyan", "cylinder", 64, 64);
  EXPECT_EQ(render_instruction(1, cyan_cylinder, {}), "Add a cyan cylinder at the center");

  const auto red_cube = object("red", "cube", 40, 30);
  EXPECT_EQ(render_instruction(2, red_cube, {full_relation(red_cube, cyan_cylinder)}),
            "Add a red cube behind it on the left");

  const auto purple_cylinder = object("purple", "cylinder", 90, 100);
  RefRelation depth_only{cyan_cylinder, std::nullopt, Depth::kInFront};
  EXPECT_EQ(render_instruction(3, purple_cylinder, {full_relation(purple_cylinder, red_cube), depth_only}),
            "Add a purple cylinder in front of it on the right and in front of the cyan cylinder");
}

TEST(RenderInstruction, WrongReferenceCount) {
  const auto a = object("red", "cube", 10, 10);
  const auto b = object("blue", "cube", 30, 30);
  EXPECT_THROW(render_instruction(1, a, {full_relation(a, b)}), std::invalid_argument);
  EXPECT_THROW(render_instruction(2, a, {}), std::invalid_argument);
  EXPECT_THROW(render_instruction(3, a, {full_relation(a, b)}), std::invalid_argument);
}

TEST(Rasterize, EmptySceneIsUniformBackground) {
  GenConfig config;
  const auto image = rasterize_scene({}, config);
  const auto first = std::vector<float>(image.values().begin(), image.values().begin() + 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_EQ(image.at(y, x, c), first[static_cast<std::size_t>(c)]);
    }
  }
}

TEST(Rasterize, RedCubeCoversASquareAroundItsCenter) {
  GenConfig config;
  const auto background = rasterize_scene({}, config);
  const auto image = rasterize_scene({object("red", "cube", 64, 64)}, config);
  const float red_r = 173 / 127.5f - 1.0f;
  const int g = config.glyph_half_size;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      const bool inside = std::abs(x - 64) <= g - 1 && std::abs(y - 64) <= g - 1;
      const bool outside = std::abs(x - 64) > g + 1 || std::abs(y - 64) > g + 1;
      if (inside) EXPECT_NEAR(image.at(y, x, 0), red_r, 1e-6) << x << "," << y;
      if (outside) {
        for (int c = 0; c < 3; ++c) ASSERT_EQ(image.at(y, x, c), background.at(y, x, c));
      }
    }
  }
}

// Composites single-object renders by hand: at each pixel the covering
// object with the largest y wins.
TEST(Rasterize, OverlapMatchesManualCompositor) {
  GenConfig config;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(20, 108);
  std::uniform_int_distribution<int> jitter(-9, 9);
  const auto catalog = make_catalog(config);
  const auto background = rasterize_scene({}, config);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<ObjectSpec> scene;
    const int cx = coord(rng);
    const int cy = coord(rng);
    std::set<int> ys;
    for (int k = 0; k < 3; ++k) {
      int y = cy + jitter(rng);
      while (ys.contains(y)) ++y;
      ys.insert(y);
      const auto& entry = catalog.entries[static_cast<std::size_t>(trial * 3 + k) % catalog.size()];
      scene.push_back(ObjectSpec{entry.class_id, entry.shape, entry.color,
                                 Point2{static_cast<float>(cx + jitter(rng)), static_cast<float>(y)}});
    }
    std::vector<ImageGrid> singles;
    for (const auto& o : scene) singles.push_back(rasterize_scene({o}, config));
    const auto image = rasterize_scene(scene, config);
    for (int y = 0; y < 128; ++y) {
      for (int x = 0; x < 128; ++x) {
        int winner = -1;
        for (int k = 0; k < 3; ++k) {
          bool covered = false;
          for (int c = 0; c < 3; ++c) covered |= singles[k].at(y, x, c) != background.at(y, x, c);
          if (covered && (winner < 0 || scene[k].centroid.y > scene[winner].centroid.y)) winner = k;
        }
        const auto& expected = winner < 0 ? background : singles[static_cast<std::size_t>(winner)];
        for (int c = 0; c < 3; ++c) ASSERT_EQ(image.at(y, x, c), expected.at(y, x, c)) << trial << " " << x << "," << y;
      }
    }
  }
}

TEST(SampleSequence, FirstObjectAtCenter) {
  GenConfig config;
  config.seed = 0;
  config.split_sizes = {1, 0, 0};
  const auto dataset = generate(config);
  const auto& first = dataset.sequences[0].turns[0].scene[0];
  EXPECT_EQ(first.centroid, (Point2{64.0f, 64.0f}));
}

TEST(SampleSequence, ConstraintsHoldAcrossSeeds) {
  GenConfig config;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    const auto sequence = sample_scene_sequence(config, rng);
    ASSERT_EQ(check_sequence(sequence, config), "") << "seed " << seed;
  }
}

TEST(SampleSequence, UnsatisfiableConstraintsFail) {
  GenConfig config;
  config.min_distance = 200;
  std::mt19937_64 rng(0);
  EXPECT_THROW(sample_scene_sequence(config, rng), PlacementError);
}

TEST(Generate, SplitSizesHonored) {
  GenConfig config;
  config.scale = 0.01;
  const auto dataset = generate(config);
  std::map<std::string, int> counts;
  std::size_t images = 0;
  for (const auto& s : dataset.sequences) {
    ++counts[s.split];
    images += s.turns.size();
  }
  EXPECT_EQ(counts["train"], 60);
  EXPECT_EQ(counts["valid"], 20);
  EXPECT_EQ(counts["test"], 20);
  EXPECT_EQ(images, 500u);
  for (const auto& s : dataset.sequences) {
    ASSERT_EQ(check_sequence(s, config), "") << s.id;
    ASSERT_NO_THROW(validate_sequence(s, dataset.catalog));
  }
}

TEST(Generate, ImagesMatchTheirAnnotations) {
  GenConfig config;
  config.split_sizes = {5, 0, 0};
  const auto dataset = generate(config);
  for (const auto& s : dataset.sequences) {
    EXPECT_EQ(s.background, rasterize_scene({}, config));
    for (const auto& turn : s.turns) EXPECT_EQ(turn.image, rasterize_scene(turn.scene, config));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TEST(Generate, ByteIdenticalAcrossRuns) {
  GenConfig config;
  config.split_sizes = {4, 2, 2};
  config.seed = 9;
  testing::TempDir a, b;
  generate_dataset(config, a.path());
  generate_dataset(config, b.path());
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto relative = std::filesystem::relative(entry.path(), a.path());
    ASSERT_EQ(read_file(entry.path()), read_file(b.path() / relative)) << relative;
    ++files;
  }
  EXPECT_EQ(files, 2u + 8u * 6u);
}

TEST(Generate, DifferentSeedsDiffer) {
  GenConfig a;
  a.split_sizes = {3, 0, 0};
  auto b = a;
  b.seed = 1;
  EXPECT_NE(generate(a).sequences[0].turns[4].instruction + generate(a).sequences[1].turns[4].instruction,
            generate(b).sequences[0].turns[4].instruction + generate(b).sequences[1].turns[4].instruction);
}

}  // namespace
}  // namespace iterdraw::iclevr
