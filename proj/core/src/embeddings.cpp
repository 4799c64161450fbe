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

#include "iterdraw/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace iterdraw {

namespace {
constexpr const char* kUnkWord = "<unk>";
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("embedding dimension must be positive");
  words_.push_back(kUnkWord);
  data_.assign(static_cast<std::size_t>(dim), 0.0f);
}

std::int64_t EmbeddingTable::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

void EmbeddingTable::add(const std::string& word, const std::vector<float>& vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw EmbeddingFormatError("vector for '" + word + "' has dimension " +
                               std::to_string(vector.size()) + ", expected " +
                               std::to_string(dim_));
  }
  if (word == "unk") std::copy(vector.begin(), vector.end(), data_.begin());
  if (index_.count(word) != 0) return;
  index_.emplace(word, static_cast<std::int64_t>(words_.size()));
  words_.push_back(word);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

EmbeddingTable EmbeddingTable::random_for_vocabulary(const std::vector<std::string>& vocabulary,
                                                     int dim, std::uint64_t seed) {
  EmbeddingTable table(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const float scale = 1.0f / std::sqrt(static_cast<float>(dim));
  std::vector<float> vector(static_cast<std::size_t>(dim));
  for (const auto& word : vocabulary) {
    for (auto& v : vector) v = normal(rng) * scale;
    table.add(word, vector);
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw EmbeddingFormatError("cannot open embeddings file " + path.string());
  EmbeddingTable table(dim);
  std::string line;
  std::size_t line_number = 0;
  std::vector<float> vector;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    vector.clear();
    std::string value;
    while (fields >> value) {
      try {
        vector.push_back(std::stof(value));
      } catch (const std::exception&) {
        throw EmbeddingFormatError("line " + std::to_string(line_number) +
                                   ": non-numeric value '" + value + "'");
      }
    }
    if (static_cast<int>(vector.size()) != dim) {
      throw EmbeddingFormatError("line " + std::to_string(line_number) + ": expected " +
                                 std::to_string(dim) + " values, found " +
                                 std::to_string(vector.size()));
    }
    table.add(word, vector);
  }
  if (table.rows() == 1) throw EmbeddingFormatError("embeddings file " + path.string() + " is empty");
  return table;
}

std::vector<std::int64_t> map_tokens(const EmbeddingTable& table,
                                     const std::vector<std::string>& tokens) {
  std::vector<std::int64_t> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(table.id(token));
  return ids;
}

}  // namespace iterdraw
