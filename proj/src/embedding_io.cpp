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

#include "a2lp/embedding_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <type_traits>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/kernels.hpp"

namespace a2lp {
namespace {

constexpr std::array<char, 4> kMagic = {'A', '2', 'L', 'P'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8 + 1;

std::string cell(Index row, Index col) {
  return "row " + std::to_string(row) + ", col " + std::to_string(col);
}

// Explicit byte order so files are portable regardless of host endianness.
template <typename T>
void put_le(std::string& out, T value) {
  auto bits = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits = static_cast<decltype(bits)>(bits >> 8);
  }
}

template <typename T>
T get_le(const char* p) {
  std::make_unsigned_t<T> bits = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    bits = static_cast<decltype(bits)>((bits << 8) | static_cast<unsigned char>(p[i]));
  }
  return static_cast<T>(bits);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

EmbeddingSet parse_binary(const std::string& bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kMalformedHeader, "truncated header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kMalformedHeader, "bad magic, expected A2LP");
  }
  const char* p = bytes.data() + 4;
  const auto version = get_le<std::uint32_t>(p);
  if (version != kBinaryFormatVersion) {
    throw Error(ErrorCode::kMalformedHeader,
                "unsupported format version " + std::to_string(version));
  }
  const auto rows = get_le<std::uint64_t>(p + 4);
  const auto cols = get_le<std::uint64_t>(p + 12);
  const auto flag = static_cast<unsigned char>(p[20]);
  if (flag > 1) throw Error(ErrorCode::kMalformedHeader, "labels flag must be 0 or 1");
  if (rows == 0) throw Error(ErrorCode::kEmptySet, "empty set");
  if (cols == 0) throw Error(ErrorCode::kEmptySet, "empty set: zero dimension");

  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  const std::uint64_t row_bytes = cols * 4 + (flag ? 8 : 0);
  if (cols > payload / 4 || row_bytes == 0 || payload % row_bytes != 0 ||
      payload / row_bytes != rows) {
    throw Error(ErrorCode::kDimensionMismatch,
                "payload of " + std::to_string(payload) + " bytes does not match header T=" +
                    std::to_string(rows) + ", d=" + std::to_string(cols));
  }

  Matrix vectors(rows, cols);
  const char* q = bytes.data() + kHeaderBytes;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c, q += 4) {
      const float f = std::bit_cast<float>(get_le<std::uint32_t>(q));
      if (!std::isfinite(f)) {
        throw Error(ErrorCode::kNonFinite, "non-finite value at " + cell(r, c));
      }
      vectors(r, c) = f;
    }
  }
  std::vector<std::int64_t> labels;
  if (flag) {
    labels.resize(rows);
    for (Index r = 0; r < rows; ++r, q += 8) labels[r] = get_le<std::int64_t>(q);
  }
  return make_embedding_set(std::move(vectors), std::move(labels));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

EmbeddingSet parse_csv(const std::string& text) {
  std::vector<double> values;
  std::vector<std::int64_t> labels;
  Index cols = 0;
  Index rows = 0;
  std::optional<bool> labelled;

  std::istringstream in(text);
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;

    Index col = 0;
    bool row_has_label = false;
    std::string_view rest = content;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view token = trim(rest.substr(0, comma));
      if (token.starts_with("label:")) {
        if (comma != std::string_view::npos) {
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(line_no) + ": label must be the last column");
        }
        std::int64_t label = 0;
        const auto digits = token.substr(6);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), label);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
          throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": bad label");
        }
        labels.push_back(label);
        row_has_label = true;
        break;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": bad number '" +
                                           std::string(token) + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite, "non-finite value at " + cell(rows, col));
      }
      values.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (rows == 0) {
      cols = col;
      labelled = row_has_label;
    } else if (col != cols) {
      throw Error(ErrorCode::kDimensionMismatch, "line " + std::to_string(line_no) + " has " +
                                                     std::to_string(col) + " columns, expected " +
                                                     std::to_string(cols));
    } else if (*labelled != row_has_label) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "line " + std::to_string(line_no) + ": labels present on some rows only");
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kEmptySet, "empty set");

  Matrix vectors(rows, cols);
  std::copy(values.begin(), values.end(), vectors.values().begin());
  return make_embedding_set(std::move(vectors), std::move(labels));
}

}  // namespace

void validate(const EmbeddingSet& set) {
  if (set.size() == 0 || set.dim() == 0) throw Error(ErrorCode::kEmptySet, "empty set");
  for (Index r = 0; r < set.size(); ++r) {
    const auto row = set.vectors.row(r);
    for (Index c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) {
        throw Error(ErrorCode::kNonFinite, "non-finite value at " + cell(r, c));
      }
    }
  }
  if (!set.has_labels()) return;
  if (set.labels.size() != set.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label count differs from row count");
  }
  const std::int64_t classes = set.class_count.value_or(0);
  for (Index r = 0; r < set.labels.size(); ++r) {
    if (set.labels[r] < 0 || set.labels[r] >= classes) {
      throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(set.labels[r]) +
                                                   " at row " + std::to_string(r) +
                                                   " outside [0, class_count)");
    }
  }
}

EmbeddingSet make_embedding_set(Matrix vectors, std::vector<std::int64_t> labels) {
  EmbeddingSet set{std::move(vectors), std::move(labels), std::nullopt};
  if (set.has_labels()) {
    set.class_count = *std::max_element(set.labels.begin(), set.labels.end()) + 1;
  }
  validate(set);
  return set;
}

EmbeddingSet gather_rows(const EmbeddingSet& set, std::span<const Index> indices) {
  EmbeddingSet out;
  out.vectors = Matrix(indices.size(), set.dim());
  for (Index i = 0; i < indices.size(); ++i) {
    if (indices[i] >= set.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row index " + std::to_string(indices[i]) + " out of range");
    }
    std::ranges::copy(set.vectors.row(indices[i]), out.vectors.row(i).begin());
    if (set.has_labels()) out.labels.push_back(set.labels[indices[i]]);
  }
  out.class_count = set.class_count;
  return out;
}

FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::kCsv : FileFormat::kBinary;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path, FileFormat format) {
  const std::string bytes = read_file(path);
  return format == FileFormat::kBinary ? parse_binary(bytes) : parse_csv(bytes);
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path,
                     FileFormat format) {
  validate(set);
  std::string out;
  if (format == FileFormat::kBinary) {
    out.reserve(kHeaderBytes + set.size() * (set.dim() * 4 + 8));
    out.append(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kBinaryFormatVersion);
    put_le<std::uint64_t>(out, set.size());
    put_le<std::uint64_t>(out, set.dim());
    out.push_back(set.has_labels() ? '\1' : '\0');
    for (const double v : set.vectors.values()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    for (const std::int64_t label : set.labels) put_le<std::int64_t>(out, label);
  } else {
    char buf[32];
    for (Index r = 0; r < set.size(); ++r) {
      const auto row = set.vectors.row(r);
      for (Index c = 0; c < row.size(); ++c) {
        if (c > 0) out.push_back(',');
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[c]);
        out.append(buf, ptr);
      }
      if (set.has_labels()) out += ",label:" + std::to_string(set.labels[r]);
      out.push_back('\n');
    }
  }
  write_file(path, out);
}

std::string_view to_string(PreprocessMode mode) {
  switch (mode) {
    case PreprocessMode::kNone: return "none";
    case PreprocessMode::kL2: return "l2";
    case PreprocessMode::kPlc: return "plc";
  }
  return "unknown";
}

PreprocessMode parse_preprocess_mode(std::string_view name) {
  if (name == "none") return PreprocessMode::kNone;
  if (name == "l2") return PreprocessMode::kL2;
  if (name == "plc") return PreprocessMode::kPlc;
  throw Error(ErrorCode::kInvalidArgument, "unknown preprocess mode: " + std::string(name));
}

EmbeddingSet l2_normalize(EmbeddingSet set) {
  for (Index r = 0; r < set.size(); ++r) {
    auto row = set.vectors.row(r);
    const double norm = std::sqrt(kernels::squared_norm(row));
    if (norm < 1e-12) {
      throw Error(ErrorCode::kZeroVector,
                  "zero vector not normalizable (row " + std::to_string(r) + ")");
    }
    for (double& x : row) x /= norm;
  }
  return set;
}

EmbeddingSet plc_preprocess(EmbeddingSet set) {
  for (Index r = 0; r < set.size(); ++r) {
    auto row = set.vectors.row(r);
    for (Index c = 0; c < row.size(); ++c) {
      if (row[c] < 0.0) {
        throw Error(ErrorCode::kNegativeFeature,
                    "PLC requires nonnegative features (" + cell(r, c) + ")");
      }
      row[c] = std::sqrt(row[c]);
    }
  }
  set = l2_normalize(std::move(set));

  std::vector<double> mean(set.dim(), 0.0);
  for (Index r = 0; r < set.size(); ++r) kernels::axpy(1.0, set.vectors.row(r), mean);
  for (double& m : mean) m /= static_cast<double>(set.size());
  for (Index r = 0; r < set.size(); ++r) kernels::axpy(-1.0, mean, set.vectors.row(r));
  return set;
}

EmbeddingSet preprocess(EmbeddingSet set, PreprocessMode mode) {
  switch (mode) {
    case PreprocessMode::kNone: return set;
    case PreprocessMode::kL2: return l2_normalize(std::move(set));
    case PreprocessMode::kPlc: return plc_preprocess(std::move(set));
  }
  return set;
}

}  // namespace a2lp
