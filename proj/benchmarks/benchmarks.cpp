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

#include <benchmark/benchmark.h>
#include <torch/torch.h>

#include <random>

#include "iterdraw/iclevr.hpp"
#include "iterdraw/metrics.hpp"
#include "iterdraw/model.hpp"

namespace iterdraw {
namespace {

void BM_RasterizeScene(benchmark::State& state) {
  iclevr::GenConfig config;
  config.split_sizes = {1, 0, 0};
  const auto dataset = iclevr::generate(config);
  const auto& scene = dataset.sequences.front().turns.back().scene;
  for (auto _ : state) benchmark::DoNotOptimize(iclevr::rasterize_scene(scene, config));
}
BENCHMARK(BM_RasterizeScene);

void BM_GenerateSequence(benchmark::State& state) {
  iclevr::GenConfig config;
  std::mt19937_64 rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(iclevr::sample_scene_sequence(config, rng));
}
BENCHMARK(BM_GenerateSequence);

void BM_RelSim(benchmark::State& state) {
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<float> coord(0.0f, 128.0f);
  DetectionSet a, b;
  for (int id = 0; id < state.range(0); ++id) {
    a.presence[id] = b.presence[id] = 1.0f;
    a.centroids[id] = {coord(rng), coord(rng)};
    b.centroids[id] = {coord(rng), coord(rng)};
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rel_sim(build_scene_graph(a, 128), build_scene_graph(b, 128)));
  }
}
BENCHMARK(BM_RelSim)->Arg(5)->Arg(24);

void BM_GeneratorForward(benchmark::State& state) {
  torch::set_num_threads(1);
  torch::NoGradGuard no_grad;
  const auto dims = ModelDims::desk(24);
  Generator generator(dims, true);
  generator->eval();
  const auto batch = state.range(0);
  const auto noise = torch::randn({batch, dims.noise_dim});
  const auto condition = torch::randn({batch, dims.context_dim});
  const auto context = torch::randn({batch, dims.context_dim});
  const auto features = torch::randn({batch, dims.canvas_channels, dims.canvas_grid, dims.canvas_grid});
  for (auto _ : state) benchmark::DoNotOptimize(generator->forward(noise, condition, context, features));
}
BENCHMARK(BM_GeneratorForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace iterdraw

BENCHMARK_MAIN();
