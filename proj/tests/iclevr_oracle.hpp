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

#ifndef ITERDRAW_TESTS_ICLEVR_ORACLE_HPP_
#define ITERDRAW_TESTS_ICLEVR_ORACLE_HPP_

#include <cmath>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "iterdraw/iclevr.hpp"

namespace iterdraw::testing {

using iclevr::GenConfig;

inline const std::regex kTurn1(R"(^Add a (\w+) (cube|sphere|cylinder) at the center$)");
inline const std::regex kTurn2(R"(^Add a (\w+) (cube|sphere|cylinder) (behind|in front of) it on the (left|right)$)");
inline const std::regex kTurn3(
    R"(^Add a (\w+) (cube|sphere|cylinder) (behind|in front of) it on the (left|right) and (behind|in front of) the (\w+) (cube|sphere|cylinder) on the (left|right)$)");

// Independent comparator: words for `a` relative to `b`.
inline std::pair<std::string, std::string> oracle_words(const ObjectSpec& a, const ObjectSpec& b) {
  return {a.centroid.y < b.centroid.y ? "behind" : "in front of", a.centroid.x < b.centroid.x ? "left" : "right"};
}

inline const ObjectSpec* find_by_attributes(const std::vector<ObjectSpec>& scene, const std::string& color,
                                     const std::string& shape) {
  for (const auto& o : scene) {
    if (o.color == color && o.shape == shape) return &o;
  }
  return nullptr;
}

// Checks the grammar and the relation words of every instruction against
// the stored centroids. Returns an empty string on success.
inline std::string check_sequence(const SceneSequence& sequence, const GenConfig& config) {
  std::ostringstream problems;
  const float center = config.canvas_side / 2.0f;
  if (sequence.turns.size() != 5u) problems << "turn count " << sequence.turns.size() << "; ";
  std::set<std::pair<std::string, std::string>> attributes;
  for (std::size_t t = 0; t < sequence.turns.size(); ++t) {
    const auto& turn = sequence.turns[t];
    const auto& scene = turn.scene;
    if (scene.size() != t + 1) {
      problems << "turn " << t + 1 << " has " << scene.size() << " objects; ";
      continue;
    }
    const auto& added = scene.back();
    if (!attributes.insert({*added.color, added.shape}).second) problems << "repeated attributes; ";
    for (std::size_t i = 0; i < t; ++i) {
      if (!(scene[i] == sequence.turns[t - 1].scene[i])) problems << "scene not monotone at " << t + 1 << "; ";
    }
    for (const auto& o : scene) {
      if (o.centroid.x < config.margin || o.centroid.x > config.canvas_side - 1 - config.margin ||
          o.centroid.y < config.margin || o.centroid.y > config.canvas_side - 1 - config.margin) {
        problems << "margin violated; ";
      }
    }
    for (std::size_t i = 0; i < scene.size(); ++i) {
      for (std::size_t j = i + 1; j < scene.size(); ++j) {
        const double d = std::hypot(scene[i].centroid.x - scene[j].centroid.x, scene[i].centroid.y - scene[j].centroid.y);
        if (d < config.min_distance) problems << "distance " << d << "; ";
      }
    }
    std::smatch m;
    if (t == 0) {
      if (!std::regex_match(turn.instruction, m, kTurn1)) {
        problems << "turn 1 grammar: " << turn.instruction << "; ";
        continue;
      }
      if (added.centroid.x != center || added.centroid.y != center) problems << "first object off center; ";
    } else if (t == 1) {
      if (!std::regex_match(turn.instruction, m, kTurn2)) {
        problems << "turn 2 grammar: " << turn.instruction << "; ";
        continue;
      }
      const auto words = oracle_words(added, scene[0]);
      if (m[3] != words.first || m[4] != words.second) problems << "turn 2 relation: " << turn.instruction << "; ";
    } else {
      if (!std::regex_match(turn.instruction, m, kTurn3)) {
        problems << "turn " << t + 1 << " grammar: " << turn.instruction << "; ";
        continue;
      }
      const auto it_words = oracle_words(added, scene[t - 1]);
      if (m[3] != it_words.first || m[4] != it_words.second) problems << "'it' relation: " << turn.instruction << "; ";
      const auto* named = find_by_attributes(scene, m[6], m[7]);
      if (named == nullptr || named == &scene.back()) {
        problems << "named reference missing: " << turn.instruction << "; ";
        continue;
      }
      const auto named_words = oracle_words(added, *named);
      if (m[5] != named_words.first || m[8] != named_words.second) {
        problems << "named relation: " << turn.instruction << "; ";
      }
    }
    if (m[1] != *added.color || m[2] != added.shape) problems << "attributes do not match the annotation; ";
  }
  return problems.str();
}

}  // namespace iterdraw::testing

#endif  // ITERDRAW_TESTS_ICLEVR_ORACLE_HPP_
