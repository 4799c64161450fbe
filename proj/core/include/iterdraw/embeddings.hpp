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

#ifndef ITERDRAW_EMBEDDINGS_HPP_
#define ITERDRAW_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace iterdraw {

// Fixed word-embedding table. Row 0 is reserved for unknown words; it takes
// the vector of the token "unk" when the source file provides one.
class EmbeddingTable {
 public:
  static constexpr int kDefaultDim = 300;
  static constexpr std::int64_t kUnkId = 0;

  explicit EmbeddingTable(int dim = kDefaultDim);

  int dim() const { return dim_; }
  std::size_t rows() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<float>& data() const { return data_; }

  std::int64_t id(const std::string& token) const;
  const float* row(std::int64_t id) const { return data_.data() + id * dim_; }

  void add(const std::string& word, const std::vector<float>& vector);

  // Deterministic pseudo-random vectors for a vocabulary, used when no
  // pretrained file is configured.
  static EmbeddingTable random_for_vocabulary(const std::vector<std::string>& vocabulary,
                                              int dim, std::uint64_t seed);

 private:
  int dim_;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::int64_t> index_;
};

class EmbeddingFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads the standard text format: one token followed by `dim` floats per line.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               int dim = EmbeddingTable::kDefaultDim);

// Out-of-vocabulary tokens map to EmbeddingTable::kUnkId.
std::vector<std::int64_t> map_tokens(const EmbeddingTable& table,
                                     const std::vector<std::string>& tokens);

}  // namespace iterdraw

#endif  // ITERDRAW_EMBEDDINGS_HPP_
