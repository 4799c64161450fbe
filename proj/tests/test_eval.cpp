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

#include <algorithm>
#include <cmath>
#include <random>

#include "iterdraw/detector.hpp"
#include "iterdraw/evaluate.hpp"
#include "iterdraw/image_io.hpp"
#include "iterdraw/metrics.hpp"
#include "json.hpp"
#include "relsim_fixtures.hpp"
#include "test_util.hpp"

namespace iterdraw {
namespace {

DetectionSet detections(const std::vector<std::pair<ClassId, Point2>>& objects) {
  DetectionSet set;
  for (const auto& [id, p] : objects) {
    set.presence[id] = 1.0f;
    set.centroids[id] = p;
  }
  return set;
}

// Brute-force reference over explicit vertex positions.
std::set<SceneEdge> comparator_edges(const std::map<ClassId, Point2>& positions) {
  std::set<SceneEdge> out;
  for (const auto& [a, pa] : positions) {
    for (const auto& [b, pb] : positions) {
      if (a == b) continue;
      if (pa.x < pb.x) out.insert({a, b, Relation::kLeftOf});
      if (pb.x < pa.x) out.insert({a, b, Relation::kRightOf});
      if (pa.y < pb.y) out.insert({a, b, Relation::kBehind});
      if (pb.y < pa.y) out.insert({a, b, Relation::kInFrontOf});
    }
  }
  return out;
}

// Independent RelSim: vectors and linear scans instead of set algebra.
double oracle_rel_sim(const SceneGraph& gt, const SceneGraph& gen) {
  std::vector<ClassId> gt_objects, common;
  for (const auto v : gt.vertices) {
    if (v != kCenterVertex) gt_objects.push_back(v);
  }
  for (const auto v : gt_objects) {
    if (std::find(gen.vertices.begin(), gen.vertices.end(), v) != gen.vertices.end()) common.push_back(v);
  }
  const double recall = gt_objects.empty() ? 1.0 : double(common.size()) / double(gt_objects.size());
  auto kept = [&](ClassId v) { return v == kCenterVertex || std::find(common.begin(), common.end(), v) != common.end(); };
  int total = 0, hit = 0;
  for (const auto& e : gt.edges) {
    if (!kept(e.src) || !kept(e.dst)) continue;
    ++total;
    for (const auto& f : gen.edges) {
      if (f.src == e.src && f.dst == e.dst && f.label == e.label) {
        ++hit;
        break;
      }
    }
  }
  if (total == 0) return common.empty() ? 0.0 : recall;
  return recall * (double(hit) / double(total));
}

DetectionSet random_detections(std::mt19937_64& rng, int num_classes, int side) {
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::uniform_int_distribution<int> coord(0, side - 1);
  DetectionSet set;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int id = cls(rng);
    set.presence[id] = 1.0f;
    set.centroids[id] = Point2{static_cast<float>(coord(rng)), static_cast<float>(coord(rng))};
  }
  return set;
}

TEST(SceneGraph, EmptyDetectionsGiveCenterOnly) {
  const auto graph = build_scene_graph(DetectionSet{}, 128);
  EXPECT_EQ(graph.vertices, (std::set<ClassId>{kCenterVertex}));
  EXPECT_TRUE(graph.edges.empty());
}

TEST(SceneGraph, SingleObjectTiedWithCenterOnDepth) {
  const auto graph = build_scene_graph(detections({{3, {10, 64}}}), 128);
  EXPECT_EQ(graph.edges, (std::set<SceneEdge>{{3, kCenterVertex, Relation::kLeftOf},
                                                {kCenterVertex, 3, Relation::kRightOf}}));
}

TEST(SceneGraph, TwoObjectsMatchComparator) {
  const auto graph = build_scene_graph(detections({{0, {20, 20}}, {1, {100, 100}}}), 128);
  EXPECT_TRUE(graph.edges.contains({0, 1, Relation::kLeftOf}));
  EXPECT_TRUE(graph.edges.contains({0, 1, Relation::kBehind}));
  EXPECT_TRUE(graph.edges.contains({1, 0, Relation::kRightOf}));
  EXPECT_TRUE(graph.edges.contains({1, 0, Relation::kInFrontOf}));
  EXPECT_EQ(graph.edges, comparator_edges({{0, {20, 20}}, {1, {100, 100}}, {kCenterVertex, {64, 64}}}));
  EXPECT_EQ(graph.edges.size(), 12u);
}

TEST(SceneGraph, UndetectedClassesAreIgnored) {
  DetectionSet set = detections({{0, {20, 20}}});
  set.presence[5] = 0.2f;
  EXPECT_EQ(build_scene_graph(set, 128).vertices, (std::set<ClassId>{kCenterVertex, 0}));
}

TEST(SceneGraph, PropertiesOnRandomDetections) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> shift(-30, 30);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto set = random_detections(rng, 10, 128);
    const auto graph = build_scene_graph(set, 128);
    std::map<ClassId, Point2> positions = set.centroids;
    positions[kCenterVertex] = {64, 64};
    ASSERT_EQ(graph.edges, comparator_edges(positions));
    for (const auto& e : graph.edges) {
      ASSERT_NE(e.src, e.dst);
      ASSERT_TRUE(graph.edges.contains({e.dst, e.src, inverse(e.label)}));
    }
    auto moved = set;
    const float dx = static_cast<float>(shift(rng));
    const float dy = static_cast<float>(shift(rng));
    for (auto& [_, p] : moved.centroids) p = {p.x + dx, p.y + dy};
    const auto moved_graph = build_scene_graph(moved, 128);
    auto objects_only = [](const SceneGraph& g) {
      std::set<SceneEdge> out;
      for (const auto& e : g.edges) {
        if (e.src != kCenterVertex && e.dst != kCenterVertex) out.insert(e);
      }
      return out;
    };
    ASSERT_EQ(objects_only(graph), objects_only(moved_graph));
  }
}

TEST(RelSim, IdenticalGraphsScoreOne) {
  const auto g = build_scene_graph(detections({{0, {20, 30}}, {1, {90, 100}}, {2, {50, 110}}}), 128);
  EXPECT_DOUBLE_EQ(rel_sim(g, g), 1.0);
}

TEST(RelSim, DisjointObjectsScoreZero) {
  const auto gt = build_scene_graph(detections({{0, {20, 30}}, {1, {90, 100}}}), 128);
  const auto gen = build_scene_graph(detections({{2, {20, 30}}, {3, {90, 100}}}), 128);
  EXPECT_DOUBLE_EQ(rel_sim(gt, gen), 0.0);
}

TEST(RelSim, PartialRecoveryWithPartialOverlap) {
  const auto [gt, gen] = testing::partial_overlap_fixture();
  EXPECT_DOUBLE_EQ(oracle_rel_sim(gt, gen), 0.25);
  EXPECT_DOUBLE_EQ(rel_sim(gt, gen), 0.25);
}

TEST(RelSim, SymmetricGraphsOverlapInPairs) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto gt = build_scene_graph(random_detections(rng, 6, 32), 32);
    const auto gen = build_scene_graph(random_detections(rng, 6, 32), 32);
    std::size_t shared = 0;
    for (const auto& e : gt.edges) shared += gen.edges.count(e);
    ASSERT_EQ(shared % 2, 0u);
    ASSERT_EQ(gt.edges.size() % 2, 0u);
  }
}

TEST(RelSim, EmptyGroundTruthConventions) {
  const auto empty = build_scene_graph(DetectionSet{}, 128);
  const auto some = build_scene_graph(detections({{0, {20, 20}}}), 128);
  EXPECT_DOUBLE_EQ(rel_sim(empty, some), 0.0);
  const auto at_center = build_scene_graph(detections({{0, {64, 64}}}), 128);
  EXPECT_DOUBLE_EQ(rel_sim(at_center, at_center), 1.0);
}

TEST(RelSim, MatchesOracleAndStaysBelowRecall) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = random_detections(rng, 8, 16);
    const auto b = random_detections(rng, 8, 16);
    const auto ga = build_scene_graph(a, 16);
    const auto gb = build_scene_graph(b, 16);
    const double value = rel_sim(ga, gb);
    ASSERT_EQ(value, oracle_rel_sim(ga, gb));
    const auto truth = ga.object_vertices();
    std::size_t common = 0;
    for (const auto v : truth) common += gb.vertices.count(v);
    const double recall = truth.empty() ? 1.0 : double(common) / double(truth.size());
    ASSERT_GE(value, 0.0);
    ASSERT_LE(value, recall);
  }
}

TEST(DetectionPrf1, Examples) {
  const auto abcd = detections({{0, {}}, {1, {}}, {2, {}}, {3, {}}});
  const auto abe = detections({{0, {}}, {1, {}}, {4, {}}});
  const auto prf = detection_prf1(abcd, abe);
  EXPECT_DOUBLE_EQ(prf.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(prf.recall, 0.5);
  EXPECT_DOUBLE_EQ(prf.f1, 4.0 / 7.0);
  const auto same = detection_prf1(abcd, abcd);
  EXPECT_EQ(same.f1, 1.0);
  const auto disjoint = detection_prf1(abe, detections({{7, {}}}));
  EXPECT_EQ(disjoint.precision, 0.0);
  EXPECT_EQ(disjoint.recall, 0.0);
  EXPECT_EQ(disjoint.f1, 0.0);
  const auto both_empty = detection_prf1(DetectionSet{}, DetectionSet{});
  EXPECT_EQ(both_empty.precision, 1.0);
  EXPECT_EQ(both_empty.recall, 1.0);
  const auto blank = detection_prf1(abe, DetectionSet{});
  EXPECT_EQ(blank.precision, 0.0);
  EXPECT_EQ(blank.recall, 0.0);
  EXPECT_EQ(blank.f1, 0.0);
}

TEST(DetectionPrf1, SwapExchangesPrecisionAndRecall) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_detections(rng, 6, 32);
    const auto b = random_detections(rng, 6, 32);
    const auto ab = detection_prf1(a, b);
    const auto ba = detection_prf1(b, a);
    if (a.detected().empty() != b.detected().empty()) continue;
    ASSERT_DOUBLE_EQ(ab.precision, ba.recall);
    ASSERT_DOUBLE_EQ(ab.recall, ba.precision);
    ASSERT_DOUBLE_EQ(ab.f1, ba.f1);
  }
}

TEST(Nrmse, Examples) {
  const auto gt = detections({{0, {64, 64}}, {1, {10, 20}}});
  EXPECT_EQ(nrmse(gt, gt, 128), 0.0);
  const auto off = detections({{0, {64 + 12.8f, 64}}});
  EXPECT_NEAR(*nrmse(gt, off, 128), 0.1, 1e-6);
  EXPECT_FALSE(nrmse(gt, detections({{5, {1, 1}}}), 128).has_value());
}

TEST(Nrmse, MatchesScalarLoop) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> coord(0.0f, 128.0f);
  for (int trial = 0; trial < 200; ++trial) {
    DetectionSet a, b;
    double sum = 0.0;
    int n = 0;
    for (int id = 0; id < 8; ++id) {
      const Point2 p{coord(rng), coord(rng)};
      const Point2 q{coord(rng), coord(rng)};
      a.presence[id] = 1.0f;
      a.centroids[id] = p;
      if (id % 3 != 0) {
        b.presence[id] = 1.0f;
        b.centroids[id] = q;
        const double dx = (double(p.x) - double(q.x)) / 128.0;
        const double dy = (double(p.y) - double(q.y)) / 128.0;
        sum += dx * dx + dy * dy;
        ++n;
      }
    }
    ASSERT_NEAR(*nrmse(a, b, 128), std::sqrt(sum / n), 1e-12);
  }
}

TEST(OracleDetect, EchoesAnnotations) {
  const std::vector<ObjectSpec> scene = {{2, "cube", "red", {10, 20}}, {5, "sphere", "blue", {40, 50}},
                                         {9, "cylinder", "gray", {70, 80}}};
  const auto set = oracle_detect(scene);
  EXPECT_EQ(set.detected(), (std::set<ClassId>{2, 5, 9}));
  EXPECT_EQ(set.centroids.at(5), (Point2{40, 50}));
  EXPECT_TRUE(oracle_detect({}).detected().empty());
  const auto graph = build_scene_graph(oracle_detect({scene[0], scene[1]}), 128);
  std::set<SceneEdge> manual = {
      {2, 5, Relation::kLeftOf},  {2, 5, Relation::kBehind},  {5, 2, Relation::kRightOf},
      {5, 2, Relation::kInFrontOf}, {2, kCenterVertex, Relation::kLeftOf}, {2, kCenterVertex, Relation::kBehind},
      {kCenterVertex, 2, Relation::kRightOf}, {kCenterVertex, 2, Relation::kInFrontOf},
      {5, kCenterVertex, Relation::kLeftOf}, {5, kCenterVertex, Relation::kBehind},
      {kCenterVertex, 5, Relation::kRightOf}, {kCenterVertex, 5, Relation::kInFrontOf}};
  EXPECT_EQ(graph.edges, manual);
}

TEST(Detector, MaskedLocalizationIgnoresAbsentClasses) {
  const auto presence = torch::tensor({{1.0f, 0.0f}});
  const auto target = torch::tensor({{{0.5f, 0.5f}, {0.0f, 0.0f}}});
  const auto a = torch::tensor({{{0.6f, 0.5f}, {0.9f, 0.9f}}});
  const auto b = torch::tensor({{{0.6f, 0.5f}, {0.1f, 0.2f}}});
  EXPECT_NEAR(masked_localization_loss(a, target, presence).item<float>(), 0.01f, 1e-7);
  EXPECT_EQ(masked_localization_loss(a, target, presence).item<float>(),
            masked_localization_loss(b, target, presence).item<float>());
}

TEST(Detector, TargetsFromScene) {
  const auto targets = detector_targets({{1, "cube", "red", {32, 64}}}, 3, 128);
  EXPECT_TRUE(torch::equal(targets.presence, torch::tensor({0.0f, 1.0f, 0.0f})));
  EXPECT_FLOAT_EQ(targets.centroids[1][0].item<float>(), 0.25f);
  EXPECT_FLOAT_EQ(targets.centroids[1][1].item<float>(), 0.5f);
}

TEST(Detector, EmptyDatasetIsRejected) {
  EXPECT_THROW(train_detector({}, 3, DetectorConfig{}), std::invalid_argument);
}

TEST(Detector, BatchPreservesOrderAndSaveLoadRoundTrips) {
  torch::manual_seed(0);
  Detector detector(24, DetectorConfig{});
  const auto dataset = testing::small_iclevr(2);
  std::vector<ImageGrid> images;
  for (const auto& turn : dataset.sequences[0].turns) images.push_back(turn.image);
  const auto batch = detector.detect(images);
  ASSERT_EQ(batch.size(), images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto single = detector.detect(images[i]);
    for (int k = 0; k < 24; ++k) ASSERT_NEAR(single.presence.at(k), batch[i].presence.at(k), 1e-5);
  }
  testing::TempDir dir;
  detector.save(dir.path() / "det.pt");
  auto loaded = Detector::load(dir.path() / "det.pt");
  const auto again = loaded->detect(images);
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (int k = 0; k < 24; ++k) ASSERT_EQ(again[i].presence.at(k), batch[i].presence.at(k));
  }
  EXPECT_THROW(Detector::load(dir.path() / "missing.pt"), DetectorError);
}

TEST(Detector, LearnsASmallScene) {
  torch::manual_seed(1);
  const auto dataset = testing::small_iclevr(60);
  DetectorConfig config;
  config.epochs = 20;
  config.learning_rate = 3e-3;
  auto detector = train_detector(detector_examples(dataset.sequences), 24, config);
  const auto empty = detector->detect(dataset.sequences[0].background);
  EXPECT_TRUE(empty.detected().empty());
  const auto score = score_detector([&](const ImageGrid& im) { return detector->detect(im); },
                                    detector_examples(dataset.sequences, false));
  EXPECT_GT(score.f1, 0.6);
}

class EvaluateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dataset_ = testing::small_iclevr(6);
    for (const auto& s : dataset_.sequences) {
      annotations_[encode_png(s.background)] = {};
      for (const auto& turn : s.turns) annotations_[encode_png(turn.image)] = turn.scene;
    }
  }
  DetectFn oracle() const {
    return [this](const ImageGrid& image) {
      const auto it = annotations_.find(encode_png(image));
      return it == annotations_.end() ? DetectionSet{} : oracle_detect(it->second);
    };
  }
  Dataset dataset_;
  std::map<std::vector<std::uint8_t>, std::vector<ObjectSpec>> annotations_;
};

TEST_F(EvaluateTest, CopyGroundTruthIsPerfect) {
  const auto report = evaluate_model(
      [](const SceneSequence& s) {
        std::vector<ImageGrid> out;
        for (const auto& t : s.turns) out.push_back(t.image);
        return out;
      },
      dataset_.sequences, oracle());
  EXPECT_EQ(report.precision, 1.0);
  EXPECT_EQ(report.recall, 1.0);
  EXPECT_EQ(report.f1, 1.0);
  EXPECT_EQ(report.rel_sim, 1.0);
  EXPECT_EQ(report.examples.size(), 6u);
}

TEST_F(EvaluateTest, BlankImageScoresZero) {
  const auto report = evaluate_model(
      [](const SceneSequence& s) { return std::vector<ImageGrid>(s.turns.size(), s.background); }, dataset_.sequences,
      oracle());
  EXPECT_EQ(report.recall, 0.0);
  EXPECT_EQ(report.rel_sim, 0.0);
  EXPECT_EQ(report.f1, 0.0);
}

TEST_F(EvaluateTest, PipelineMatchesStandaloneMetrics) {
  // Each sequence's "generation" is the final image of the next sequence.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < dataset_.sequences.size(); ++i) position[dataset_.sequences[i].id] = i;
  auto rollout = [&](const SceneSequence& s) {
    const auto next = (position.at(s.id) + 1) % dataset_.sequences.size();
    return std::vector<ImageGrid>{dataset_.sequences[next].turns.back().image};
  };
  const auto report = evaluate_model(rollout, dataset_.sequences, oracle());
  double rel = 0.0, f1 = 0.0;
  for (std::size_t i = 0; i < dataset_.sequences.size(); ++i) {
    const auto& other = dataset_.sequences[(i + 1) % dataset_.sequences.size()];
    const auto truth = oracle_detect(dataset_.sequences[i].turns.back().scene);
    const auto gen = oracle_detect(other.turns.back().scene);
    const double r = rel_sim(build_scene_graph(truth, 128), build_scene_graph(gen, 128));
    EXPECT_EQ(report.examples[i].rel_sim, r);
    rel += r;
    f1 += detection_prf1(truth, gen).f1;
  }
  EXPECT_DOUBLE_EQ(report.rel_sim, rel / 6.0);
  EXPECT_DOUBLE_EQ(report.f1, f1 / 6.0);
  const auto doc = nlohmann::json::parse(report.to_json());
  EXPECT_EQ(doc["examples"].size(), 6u);
  EXPECT_DOUBLE_EQ(doc["rel_sim"].get<double>(), report.rel_sim);
}

TEST_F(EvaluateTest, EmptySplitIsRejected) {
  EXPECT_THROW(evaluate_model([](const SceneSequence&) { return std::vector<ImageGrid>{}; }, {}, oracle()),
               std::invalid_argument);
}

}  // namespace
}  // namespace iterdraw
