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

#include <fstream>
#include <random>

#include "iterdraw/dataset_io.hpp"
#include "iterdraw/image_io.hpp"
#include "iterdraw/tokenize.hpp"
#include "iterdraw/types.hpp"
#include "test_util.hpp"

namespace iterdraw {
namespace {

using testing::TempDir;

std::size_t count_png(const std::filesystem::path& root) {
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    n += entry.path().extension() == ".png";
  }
  return n;
}

TEST(ImageGrid, DefaultsToBlackAndChecksRange) {
  ImageGrid image(4, 3);
  EXPECT_EQ(image.height(), 4);
  EXPECT_EQ(image.width(), 3);
  EXPECT_EQ(image.values().size(), 36u);
  EXPECT_NO_THROW(image.check_range());
  image.at(1, 2, 0) = 1.5f;
  EXPECT_THROW(image.check_range(), std::invalid_argument);
}

TEST(ImageIo, PixelMappingEndpoints) {
  EXPECT_EQ(quantize_pixel(-1.0f), 0);
  EXPECT_EQ(quantize_pixel(1.0f), 255);
  EXPECT_FLOAT_EQ(dequantize_pixel(0), -1.0f);
  EXPECT_FLOAT_EQ(dequantize_pixel(255), 1.0f);
  for (int p = 0; p < 256; ++p) EXPECT_EQ(quantize_pixel(dequantize_pixel(static_cast<std::uint8_t>(p))), p);
}

TEST(ImageIo, PngRoundTripWithinQuantization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  ImageGrid image(17, 17);
  for (auto& v : image.values()) v = value(rng);
  const auto decoded = decode_png(encode_png(image));
  ASSERT_EQ(decoded.height(), 17);
  ASSERT_EQ(decoded.width(), 17);
  for (std::size_t i = 0; i < image.values().size(); ++i) {
    EXPECT_LE(std::abs(decoded.values()[i] - image.values()[i]), 1.0f / 127.5f + 1e-6f);
  }
}

TEST(ImageIo, CorruptPngIsRejected) {
  std::vector<std::uint8_t> bytes = {1, 2, 3, 4, 5};
  EXPECT_ANY_THROW(decode_png(bytes));
}

TEST(ImageIo, ResizeKeepsConstantImages) {
  ImageGrid image(8, 8, 0.25f);
  const auto resized = resize_image(image, 4, 4);
  for (const auto v : resized.values()) EXPECT_FLOAT_EQ(v, 0.25f);
  const auto up = resize_image(image, 16, 16);
  for (const auto v : up.values()) EXPECT_FLOAT_EQ(v, 0.25f);
}

TEST(ImageIo, Base64RoundTrip) {
  for (std::size_t n = 0; n < 10; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(37 * i + 11);
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  EXPECT_EQ(base64_encode({'f', 'o', 'o'}), "Zm9v");
  EXPECT_THROW(base64_decode("@@@"), std::invalid_argument);
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Add a Red cube, please."),
            (std::vector<std::string>{"add", "a", "red", "cube", ",", "please", "."}));
  EXPECT_EQ(tokenize("big sun <teller-drawer> ok"),
            (std::vector<std::string>{"big", "sun", "<teller-drawer>", "ok"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(SceneGraphTypes, RelationInverses) {
  EXPECT_EQ(inverse(Relation::kLeftOf), Relation::kRightOf);
  EXPECT_EQ(inverse(Relation::kRightOf), Relation::kLeftOf);
  EXPECT_EQ(inverse(Relation::kBehind), Relation::kInFrontOf);
  EXPECT_EQ(inverse(Relation::kInFrontOf), Relation::kBehind);
}

TEST(DetectionSetType, ThresholdIsStrict) {
  DetectionSet set;
  set.presence = {{1, 0.5f}, {2, 0.51f}, {3, 0.9f}};
  EXPECT_EQ(set.detected(), (std::set<ClassId>{2, 3}));
}

TEST(DatasetIo, OneSequenceWritesOneLineAndSixImages) {
  auto dataset = testing::small_iclevr(1);
  TempDir dir;
  const auto summary = write_dataset(dataset, dir.path());
  EXPECT_EQ(summary.num_sequences, 1u);
  EXPECT_EQ(summary.num_turn_images, 5u);
  EXPECT_EQ(summary.num_background_images, 1u);
  EXPECT_EQ(count_png(dir.path()), 6u);
  std::ifstream index(dir.path() / "index.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(index, line)) lines += !line.empty();
  EXPECT_EQ(lines, 1);
}

TEST(DatasetIo, RoundTripIsIdentityForQuantizedImages) {
  const auto dataset = testing::small_iclevr(3, 1, 1, 5);
  TempDir dir;
  write_dataset(dataset, dir.path());
  const auto loaded = read_dataset(dir.path());
  EXPECT_EQ(loaded.catalog, dataset.catalog);
  ASSERT_EQ(loaded.sequences.size(), dataset.sequences.size());
  for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
    EXPECT_EQ(loaded.sequences[i], dataset.sequences[i]) << dataset.sequences[i].id;
  }
}

TEST(DatasetIo, RoundTripErrorBoundedForArbitraryValues) {
  auto dataset = testing::small_iclevr(1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> value(-1.0f, 1.0f);
  for (auto& v : dataset.sequences[0].turns[2].image.values()) v = value(rng);
  TempDir dir;
  write_dataset(dataset, dir.path());
  const auto loaded = read_dataset(dir.path());
  const auto& a = dataset.sequences[0].turns[2].image.values();
  const auto& b = loaded.sequences[0].turns[2].image.values();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i] - b[i]), 1.0f / 127.5f + 1e-6f);
  for (const auto& turn : loaded.sequences[0].turns) {
    EXPECT_EQ(turn.image.height(), 128);
    EXPECT_EQ(turn.image.width(), 128);
  }
}

TEST(DatasetIo, DuplicateIdsAreRejected) {
  auto dataset = testing::small_iclevr(2);
  dataset.sequences[1].id = dataset.sequences[0].id;
  TempDir dir;
  try {
    write_dataset(dataset, dir.path());
    FAIL() << "expected a duplicate-id error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate sequence id"), std::string::npos);
  }
}

TEST(DatasetIo, EmptyDatasetIsRejected) {
  Dataset dataset;
  TempDir dir;
  EXPECT_THROW(write_dataset(dataset, dir.path()), DatasetIoError);
}

TEST(DatasetIo, MissingImageNamesThePath) {
  const auto dataset = testing::small_iclevr(1);
  TempDir dir;
  write_dataset(dataset, dir.path());
  const auto victim = dir.path() / "images" / dataset.sequences[0].id / "turn3.png";
  std::filesystem::remove(victim);
  try {
    read_dataset(dir.path());
    FAIL() << "expected a missing-file error";
  } catch (const DatasetIoError& e) {
    EXPECT_NE(std::string(e.what()).find("turn3.png"), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, MalformedIndexLineIsReported) {
  const auto dataset = testing::small_iclevr(1);
  TempDir dir;
  write_dataset(dataset, dir.path());
  std::ofstream(dir.path() / "index.jsonl", std::ios::app) << "{not json\n";
  try {
    read_dataset(dir.path());
    FAIL() << "expected a malformed-line error";
  } catch (const DatasetIoError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(DatasetIo, FourTurnSequenceFailsValidation) {
  auto dataset = testing::small_iclevr(1);
  dataset.sequences[0].turns.pop_back();
  try {
    validate_sequence(dataset.sequences[0], dataset.catalog);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.sequence_id(), dataset.sequences[0].id);
    EXPECT_NE(std::string(e.what()).find("expected 5 turns"), std::string::npos) << e.what();
  }
  TempDir dir;
  write_dataset(dataset, dir.path());
  EXPECT_THROW(read_dataset(dir.path()), ValidationError);
}

TEST(DatasetIo, ValidationNamesTheTurn) {
  auto base = testing::small_iclevr(1);
  {
    auto dataset = base;
    dataset.sequences[0].turns[3].scene.pop_back();
    try {
      validate_sequence(dataset.sequences[0], dataset.catalog);
      FAIL();
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.turn(), 4);
    }
  }
  {
    auto dataset = base;
    dataset.sequences[0].turns[1].scene[0].centroid.x = 500.0f;
    EXPECT_THROW(validate_sequence(dataset.sequences[0], dataset.catalog), ValidationError);
  }
  {
    auto dataset = base;
    auto& object = dataset.sequences[0].turns[2].scene.back();
    object.class_id = (object.class_id + 1) % 24;
    EXPECT_THROW(validate_sequence(dataset.sequences[0], dataset.catalog), ValidationError);
  }
  {
    auto dataset = base;
    dataset.sequences[0].turns[4].scene[0] = dataset.sequences[0].turns[4].scene[1];
    dataset.sequences[0].turns[4].scene[0].centroid.x += 1.0f;
    EXPECT_THROW(validate_sequence(dataset.sequences[0], dataset.catalog), ValidationError);
  }
}

}  // namespace
}  // namespace iterdraw
