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

#include "iterdraw/evaluate.hpp"

#include <stdexcept>

#include "iterdraw/metrics.hpp"
#include "iterdraw/trainer.hpp"
#include "json.hpp"

namespace iterdraw {

std::string EvalReport::to_json() const {
  nlohmann::json doc = {{"precision", precision},
                        {"recall", recall},
                        {"f1", f1},
                        {"rel_sim", rel_sim},
                        {"num_examples", examples.size()}};
  auto& list = doc["examples"] = nlohmann::json::array();
  for (const auto& e : examples) {
    nlohmann::json row = {{"sequence_id", e.sequence_id},
                          {"precision", e.precision},
                          {"recall", e.recall},
                          {"f1", e.f1},
                          {"rel_sim", e.rel_sim}};
    row["nrmse"] = e.nrmse ? nlohmann::json(*e.nrmse) : nlohmann::json(nullptr);
    list.push_back(std::move(row));
  }
  return doc.dump(2);
}

EvalReport evaluate_model(const RolloutFn& rollout, const std::vector<SceneSequence>& sequences,
                          const DetectFn& detect) {
  if (sequences.empty()) throw std::invalid_argument("evaluate_model: empty split");
  EvalReport report;
  for (const auto& sequence : sequences) {
    if (sequence.turns.empty()) throw std::invalid_argument("sequence " + sequence.id + " has no turns");
    const auto generated = rollout(sequence);
    if (generated.empty()) throw std::runtime_error("rollout produced no image for " + sequence.id);
    const auto& truth_image = sequence.turns.back().image;
    const auto truth = detect(truth_image);
    const auto predicted = detect(generated.back());
    const auto scores = detection_prf1(truth, predicted);
    const int side = truth_image.width();
    ExampleScore example;
    example.sequence_id = sequence.id;
    example.precision = scores.precision;
    example.recall = scores.recall;
    example.f1 = scores.f1;
    example.rel_sim = rel_sim(build_scene_graph(truth, side), build_scene_graph(predicted, side));
    example.nrmse = nrmse(truth, predicted, side);
    report.precision += example.precision;
    report.recall += example.recall;
    report.f1 += example.f1;
    report.rel_sim += example.rel_sim;
    report.examples.push_back(std::move(example));
  }
  const auto n = static_cast<double>(report.examples.size());
  report.precision /= n;
  report.recall /= n;
  report.f1 /= n;
  report.rel_sim /= n;
  return report;
}

EvalReport evaluate_model(DrawerModel& model, const std::vector<SceneSequence>& sequences, Detector& detector,
                          std::uint64_t seed) {
  return evaluate_model([&](const SceneSequence& s) { return evaluate_rollout(model, s, seed); }, sequences,
                        [&](const ImageGrid& image) { return detector.detect(image); });
}

DetectorScore score_detector(const DetectFn& detect, const std::vector<DetectorExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("score_detector: no examples");
  DetectorScore score;
  std::vector<DetectionSet> truth;
  std::vector<DetectionSet> predicted;
  for (const auto& example : examples) {
    truth.push_back(oracle_detect(example.scene));
    predicted.push_back(detect(example.image));
    const auto prf = detection_prf1(truth.back(), predicted.back());
    score.precision += prf.precision;
    score.recall += prf.recall;
    score.f1 += prf.f1;
  }
  const auto n = static_cast<double>(examples.size());
  score.precision /= n;
  score.recall /= n;
  score.f1 /= n;
  score.nrmse = pooled_nrmse(truth, predicted, examples.front().image.width());
  score.num_images = examples.size();
  return score;
}

}  // namespace iterdraw
