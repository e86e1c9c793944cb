// Copyright 2026 The a2lp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef A2LP_EMBEDDING_IO_HPP_
#define A2LP_EMBEDDING_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "a2lp/matrix.hpp"

namespace a2lp {

// A T x d matrix of feature vectors, optionally with a 0-based class id per
// row. Invariants: T >= 1, d >= 1, all entries finite, labels (when present)
// in [0, class_count).
struct EmbeddingSet {
  Matrix vectors;
  std::vector<std::int64_t> labels;
  std::optional<std::int64_t> class_count;

  Index size() const noexcept { return vectors.rows(); }
  Index dim() const noexcept { return vectors.cols(); }
  bool has_labels() const noexcept { return !labels.empty(); }
};

// Throws a2lp::Error describing the first violated invariant.
void validate(const EmbeddingSet& set);

// Attaches labels and sets class_count to max(label) + 1, then validates.
EmbeddingSet make_embedding_set(Matrix vectors, std::vector<std::int64_t> labels = {});

// Rows `indices` of `set`, in the given order, with their labels.
EmbeddingSet gather_rows(const EmbeddingSet& set, std::span<const Index> indices);

enum class FileFormat { kBinary, kCsv };

// ".csv" selects CSV; anything else is the binary format.
FileFormat format_from_path(const std::filesystem::path& path);

// Binary layout, little-endian:
//   "A2LP" | u32 version = 1 | u64 T | u64 d | u8 has_labels |
//   T*d float32 row-major | (has_labels) T int64 labels
// CSV: one row per line, comma-separated decimals, optional trailing
// "label:<int>" column.
EmbeddingSet load_embeddings(const std::filesystem::path& path, FileFormat format);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path,
                     FileFormat format);

inline constexpr std::uint32_t kBinaryFormatVersion = 1;

enum class PreprocessMode { kNone, kL2, kPlc };

std::string_view to_string(PreprocessMode mode);
PreprocessMode parse_preprocess_mode(std::string_view name);

// Unit Euclidean norm per row. Rows with norm < 1e-12 are an error.
EmbeddingSet l2_normalize(EmbeddingSet set);

// Element-wise sqrt, then l2 row normalization, then subtraction of the mean
// row. Output rows are not unit norm. Requires nonnegative entries.
EmbeddingSet plc_preprocess(EmbeddingSet set);

EmbeddingSet preprocess(EmbeddingSet set, PreprocessMode mode);

}  // namespace a2lp

#endif  // A2LP_EMBEDDING_IO_HPP_
