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

#ifndef ITERDRAW_EVALUATE_HPP_
#define ITERDRAW_EVALUATE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iterdraw/detector.hpp"
#include "iterdraw/model.hpp"
#include "iterdraw/types.hpp"

namespace iterdraw {

struct ExampleScore {
  std::string sequence_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double rel_sim = 0.0;
  std::optional<double> nrmse;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double rel_sim = 0.0;
  std::vector<ExampleScore> examples;

  std::string to_json() const;
};

// Produces the generated images of one sequence; only the last is scored.
using RolloutFn = std::function<std::vector<ImageGrid>(const SceneSequence&)>;
using DetectFn = std::function<DetectionSet(const ImageGrid&)>;

// Scores the final generated image of each sequence against the final
// ground-truth image, both passed through the same detector, and averages
// the per-example values.
EvalReport evaluate_model(const RolloutFn& rollout, const std::vector<SceneSequence>& sequences,
                          const DetectFn& detect);

EvalReport evaluate_model(DrawerModel& model, const std::vector<SceneSequence>& sequences, Detector& detector,
                          std::uint64_t seed = 0);

struct DetectorScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Pooled over every matched object; nullopt when nothing matched.
  std::optional<double> nrmse;
  std::size_t num_images = 0;
};

// Detector quality on ground-truth renders against their annotations:
// per-image P/R/F1 averaged, centroid error pooled.
DetectorScore score_detector(const DetectFn& detect, const std::vector<DetectorExample>& examples);

}  // namespace iterdraw

#endif  // ITERDRAW_EVALUATE_HPP_
