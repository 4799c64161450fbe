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

#ifndef ITERDRAW_TESTS_TEST_UTIL_HPP_
#define ITERDRAW_TESTS_TEST_UTIL_HPP_

#include <torch/torch.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "iterdraw/iclevr.hpp"
#include "iterdraw/model.hpp"
#include "iterdraw/trainer.hpp"

namespace iterdraw::testing {

// Directory removed when the object goes out of scope.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("iterdraw_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Small i-CLEVR dataset held in memory.
inline Dataset small_iclevr(int train, int valid = 0, int test = 0, std::uint64_t seed = 0, int side = 128) {
  iclevr::GenConfig config;
  config.seed = seed;
  config.split_sizes = {train, valid, test};
  config.canvas_side = side;
  return iclevr::generate(config);
}

// Dimensions small enough for unit tests to run in milliseconds.
inline ModelDims tiny_dims(std::int64_t num_classes = 24) {
  ModelDims dims;
  dims.noise_dim = 8;
  dims.context_dim = 16;
  dims.embedding_dim = 12;
  dims.text_hidden = 8;
  dims.canvas_grid = 8;
  dims.canvas_channels = 8;
  dims.disc_grid = 8;
  dims.disc_channels = 16;
  dims.image_side = 16;
  dims.num_classes = num_classes;
  dims.gen_width = 8;
  dims.disc_width = 8;
  return dims;
}

inline std::unique_ptr<DrawerModel> tiny_model(const Dataset& dataset, const std::string& ablation = "d-subtract",
                                               std::uint64_t seed = 0) {
  const auto dims = tiny_dims(static_cast<std::int64_t>(dataset.catalog.size()));
  const auto vocabulary = EmbeddingTable::random_for_vocabulary(dataset_vocabulary(dataset.sequences),
                                                                static_cast<int>(dims.embedding_dim), seed + 7);
  return std::make_unique<DrawerModel>(dims, AblationConfig::named(ablation), vocabulary,
                                       dataset.sequences.front().background, seed);
}

inline ImageGrid random_image(int side, std::mt19937_64& rng) {
  ImageGrid image(side, side);
  std::uniform_int_distribution<int> pixel(0, 255);
  for (auto& v : image.values()) v = static_cast<float>(pixel(rng)) / 127.5f - 1.0f;
  return image;
}

}  // namespace iterdraw::testing

#endif  // ITERDRAW_TESTS_TEST_UTIL_HPP_
