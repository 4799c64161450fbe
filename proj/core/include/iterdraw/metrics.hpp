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

#ifndef ITERDRAW_METRICS_HPP_
#define ITERDRAW_METRICS_HPP_

#include <optional>
#include <vector>

#include "iterdraw/types.hpp"

namespace iterdraw {

// Vertices are the detected classes plus kCenterVertex at (side/2, side/2).
// Every ordered pair gets left/right and behind/in-front edges from strict
// coordinate comparisons; equal coordinates give no edge on that axis.
SceneGraph build_scene_graph(const DetectionSet& detections, int canvas_side);

// Ground-truth relations recovered by the generated graph, weighted by
// object recall.
double rel_sim(const SceneGraph& gt, const SceneGraph& gen);

struct PRF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PRF1 detection_prf1(const DetectionSet& gt, const DetectionSet& gen);

// Root mean squared centroid distance over classes detected in both sets,
// with coordinates divided by the canvas side. nullopt when no class is
// shared.
std::optional<double> nrmse(const DetectionSet& gt, const DetectionSet& pred, int canvas_side);

// Pooled variant over many examples: one mean over all matched pairs.
std::optional<double> pooled_nrmse(const std::vector<DetectionSet>& gt, const std::vector<DetectionSet>& pred,
                                   int canvas_side);

}  // namespace iterdraw

#endif  // ITERDRAW_METRICS_HPP_
