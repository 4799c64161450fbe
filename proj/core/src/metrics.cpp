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

#include "iterdraw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <stdexcept>

namespace iterdraw {

SceneGraph build_scene_graph(const DetectionSet& detections, int canvas_side) {
  std::map<ClassId, Point2> positions;
  const double center = canvas_side / 2.0;
  positions[kCenterVertex] = Point2{static_cast<float>(center), static_cast<float>(center)};
  for (const auto id : detections.detected()) {
    const auto it = detections.centroids.find(id);
    if (it == detections.centroids.end()) throw std::invalid_argument("detected class has no centroid");
    positions[id] = it->second;
  }
  SceneGraph graph;
  for (const auto& [id, _] : positions) graph.vertices.insert(id);
  for (const auto& [a, pa] : positions) {
    for (const auto& [b, pb] : positions) {
      if (a == b) continue;
      if (pa.x < pb.x) graph.edges.insert({a, b, Relation::kLeftOf});
      if (pa.x > pb.x) graph.edges.insert({a, b, Relation::kRightOf});
      if (pa.y < pb.y) graph.edges.insert({a, b, Relation::kBehind});
      if (pa.y > pb.y) graph.edges.insert({a, b, Relation::kInFrontOf});
    }
  }
  return graph;
}

double rel_sim(const SceneGraph& gt, const SceneGraph& gen) {
  const auto gt_objects = gt.object_vertices();
  const auto gen_objects = gen.object_vertices();
  std::set<ClassId> common;
  std::set_intersection(gt_objects.begin(), gt_objects.end(), gen_objects.begin(), gen_objects.end(),
                        std::inserter(common, common.end()));
  const double recall =
      gt_objects.empty() ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(gt_objects.size());
  common.insert(kCenterVertex);
  auto restricted = [&](const SceneGraph& graph) {
    std::set<SceneEdge> out;
    for (const auto& edge : graph.edges) {
      if (common.contains(edge.src) && common.contains(edge.dst)) out.insert(edge);
    }
    return out;
  };
  const auto gt_edges = restricted(gt);
  if (gt_edges.empty()) return common.size() == 1 ? 0.0 : recall;
  const auto gen_edges = restricted(gen);
  std::size_t shared = 0;
  for (const auto& edge : gt_edges) shared += gen_edges.count(edge);
  return recall * (static_cast<double>(shared) / static_cast<double>(gt_edges.size()));
}

PRF1 detection_prf1(const DetectionSet& gt, const DetectionSet& gen) {
  const auto truth = gt.detected();
  const auto predicted = gen.detected();
  std::size_t hits = 0;
  for (const auto id : predicted) hits += truth.count(id);
  PRF1 out;
  if (predicted.empty()) {
    out.precision = truth.empty() ? 1.0 : 0.0;
  } else {
    out.precision = static_cast<double>(hits) / static_cast<double>(predicted.size());
  }
  out.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

namespace {

void accumulate_squared_errors(const DetectionSet& gt, const DetectionSet& pred, int canvas_side, double& total,
                               std::size_t& count) {
  const auto truth = gt.detected();
  const double side = static_cast<double>(canvas_side);
  for (const auto id : pred.detected()) {
    if (!truth.contains(id)) continue;
    const auto& a = gt.centroids.at(id);
    const auto& b = pred.centroids.at(id);
    const double dx = (static_cast<double>(a.x) - static_cast<double>(b.x)) / side;
    const double dy = (static_cast<double>(a.y) - static_cast<double>(b.y)) / side;
    total += dx * dx + dy * dy;
    ++count;
  }
}

}  // namespace

std::optional<double> nrmse(const DetectionSet& gt, const DetectionSet& pred, int canvas_side) {
  double total = 0.0;
  std::size_t count = 0;
  accumulate_squared_errors(gt, pred, canvas_side, total, count);
  if (count == 0) return std::nullopt;
  return std::sqrt(total / static_cast<double>(count));
}

std::optional<double> pooled_nrmse(const std::vector<DetectionSet>& gt, const std::vector<DetectionSet>& pred,
                                   int canvas_side) {
  if (gt.size() != pred.size()) throw std::invalid_argument("pooled_nrmse: size mismatch");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) accumulate_squared_errors(gt[i], pred[i], canvas_side, total, count);
  if (count == 0) return std::nullopt;
  return std::sqrt(total / static_cast<double>(count));
}

}  // namespace iterdraw
