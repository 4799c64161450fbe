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

#ifndef ITERDRAW_DATASET_IO_HPP_
#define ITERDRAW_DATASET_IO_HPP_

#include <filesystem>

#include "iterdraw/types.hpp"

namespace iterdraw {

// On-disk layout:
//   catalog.json
//   index.jsonl                  one sequence per line
//   images/<seq_id>/bg.png
//   images/<seq_id>/turn<k>.png  k from 1
struct ManifestSummary {
  std::size_t num_sequences = 0;
  std::size_t num_turn_images = 0;
  std::size_t num_background_images = 0;
  std::filesystem::path index_path;
};

ManifestSummary write_dataset(const Dataset& dataset, const std::filesystem::path& root);

// Validates every sequence invariant while loading. Throws ValidationError
// (naming sequence and turn) or DatasetIoError (missing files, bad lines).
Dataset read_dataset(const std::filesystem::path& root);

// Same checks read_dataset applies, usable on in-memory data.
void validate_sequence(const SceneSequence& sequence, const ClassCatalog& catalog);

}  // namespace iterdraw

#endif  // ITERDRAW_DATASET_IO_HPP_
