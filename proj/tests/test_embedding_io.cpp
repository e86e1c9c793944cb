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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <string>

#include "a2lp/embedding_io.hpp"
#include "a2lp/error.hpp"
#include "test_util.hpp"

namespace a2lp {
namespace {

namespace fs = std::filesystem;

class EmbeddingIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("a2lp_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

template <typename T>
void append_le(std::string& s, T v) {
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i, u >>= 8) s.push_back(static_cast<char>(u & 0xFF));
}

// Hand-assembled file, independent of the writer.
std::string binary_file(std::uint64_t rows, std::uint64_t cols, const std::vector<float>& values,
                        const std::vector<std::int64_t>& labels, std::uint32_t version = 1) {
  std::string s = "A2LP";
  append_le(s, version);
  append_le(s, rows);
  append_le(s, cols);
  s.push_back(labels.empty() ? 0 : 1);
  for (float f : values) append_le(s, std::bit_cast<std::uint32_t>(f));
  for (std::int64_t l : labels) append_le(s, l);
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternal;
}

TEST_F(EmbeddingIoTest, CsvExample) {
  const auto p = write("a.csv", "1,0\n0,1\n1,1\n");
  const EmbeddingSet s = load_embeddings(p, FileFormat::kCsv);
  EXPECT_EQ(s.vectors, Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}}));
  EXPECT_FALSE(s.has_labels());
}

TEST_F(EmbeddingIoTest, CsvLabelsColumn) {
  const auto p = write("a.csv", "0.5,2,label:1\n-1,3,label:0\n");
  const EmbeddingSet s = load_embeddings(p, FileFormat::kCsv);
  EXPECT_EQ(s.labels, (std::vector<std::int64_t>{1, 0}));
  EXPECT_EQ(s.class_count, 2);
}

TEST_F(EmbeddingIoTest, BinaryEmptySet) {
  const auto p = write("e.a2lp", binary_file(0, 3, {}, {}));
  try {
    load_embeddings(p, FileFormat::kBinary);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySet);
    EXPECT_STREQ(e.what(), "empty set");
  }
}

TEST_F(EmbeddingIoTest, NanTokenInCsv) {
  const auto p = write("n.csv", "1,2\n3,NaN\n");
  try {
    load_embeddings(p, FileFormat::kCsv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("non-finite value at row 1, col 1"), std::string::npos)
        << e.what();
  }
}

TEST_F(EmbeddingIoTest, NanInBinaryPayload) {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const auto p = write("n.a2lp", binary_file(2, 2, {1, 2, 3, nan}, {}));
  EXPECT_EQ(code_of([&] { load_embeddings(p, FileFormat::kBinary); }), ErrorCode::kNonFinite);
}

TEST_F(EmbeddingIoTest, DistinctErrorVariants) {
  const auto bad_magic = write("m.a2lp", "XXXX" + binary_file(1, 1, {1}, {}).substr(4));
  const auto bad_version = write("v.a2lp", binary_file(1, 1, {1}, {}, 2));
  const auto short_payload = write("s.a2lp", binary_file(3, 2, {1, 2, 3, 4}, {}));
  const auto ragged = write("r.csv", "1,2\n3\n");
  const auto garbage = write("g.csv", "1,abc\n");
  EXPECT_EQ(code_of([&] { load_embeddings(bad_magic, FileFormat::kBinary); }),
            ErrorCode::kMalformedHeader);
  EXPECT_EQ(code_of([&] { load_embeddings(bad_version, FileFormat::kBinary); }),
            ErrorCode::kMalformedHeader);
  EXPECT_EQ(code_of([&] { load_embeddings(short_payload, FileFormat::kBinary); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { load_embeddings(ragged, FileFormat::kCsv); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { load_embeddings(garbage, FileFormat::kCsv); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([&] { load_embeddings(dir_ / "missing.a2lp", FileFormat::kBinary); }),
            ErrorCode::kIo);
}

TEST_F(EmbeddingIoTest, ReaderAcceptsHandAssembledFile) {
  const auto p = write("h.a2lp", binary_file(2, 3, {1, 2, 3, 4, 5, 6.5f}, {1, 0}));
  const EmbeddingSet s = load_embeddings(p, FileFormat::kBinary);
  EXPECT_EQ(s.vectors, Matrix::from_rows({{1, 2, 3}, {4, 5, 6.5}}));
  EXPECT_EQ(s.labels, (std::vector<std::int64_t>{1, 0}));
}

TEST_F(EmbeddingIoTest, WriterProducesDocumentedLayout) {
  const EmbeddingSet s = make_embedding_set(Matrix::from_rows({{1, 2, 3}, {4, 5, 6.5}}), {1, 0});
  save_embeddings(s, dir_ / "w.a2lp", FileFormat::kBinary);
  EXPECT_EQ(read(dir_ / "w.a2lp"), binary_file(2, 3, {1, 2, 3, 4, 5, 6.5f}, {1, 0}));
}

TEST_F(EmbeddingIoTest, BinaryRoundTripIsExact) {
  Matrix m = testing::random_matrix(10, 5, 3);
  for (double& x : m.values()) x = static_cast<float>(x);
  const EmbeddingSet s = make_embedding_set(m, {0, 1, 2, 0, 1, 2, 0, 1, 2, 3});
  save_embeddings(s, dir_ / "r.a2lp", FileFormat::kBinary);
  const EmbeddingSet back = load_embeddings(dir_ / "r.a2lp", FileFormat::kBinary);
  EXPECT_EQ(back.vectors, s.vectors);
  EXPECT_EQ(back.labels, s.labels);
  save_embeddings(back, dir_ / "r2.a2lp", FileFormat::kBinary);
  EXPECT_EQ(read(dir_ / "r.a2lp"), read(dir_ / "r2.a2lp"));
}

TEST_F(EmbeddingIoTest, CsvRoundTripPrecision) {
  const EmbeddingSet s = make_embedding_set(Matrix::from_rows({{0.123456789}}));
  save_embeddings(s, dir_ / "p.csv", FileFormat::kCsv);
  const EmbeddingSet back = load_embeddings(dir_ / "p.csv", FileFormat::kCsv);
  EXPECT_LE(std::abs(back.vectors(0, 0) - 0.123456789), 1e-6);

  const EmbeddingSet r = make_embedding_set(testing::random_matrix(7, 4, 9), {0, 1, 0, 1, 0, 1, 2});
  save_embeddings(r, dir_ / "q.csv", FileFormat::kCsv);
  const EmbeddingSet rb = load_embeddings(dir_ / "q.csv", FileFormat::kCsv);
  EXPECT_LE(max_abs_diff(rb.vectors, r.vectors), 1e-6);
  EXPECT_EQ(rb.labels, r.labels);
}

TEST_F(EmbeddingIoTest, UnwritablePath) {
  const EmbeddingSet s = make_embedding_set(Matrix::from_rows({{1}}));
  EXPECT_EQ(code_of([&] { save_embeddings(s, dir_ / "no" / "such" / "x.a2lp", FileFormat::kBinary); }),
            ErrorCode::kIo);
}

TEST(FormatTest, FromPath) {
  EXPECT_EQ(format_from_path("x.csv"), FileFormat::kCsv);
  EXPECT_EQ(format_from_path("x.a2lp"), FileFormat::kBinary);
  EXPECT_EQ(format_from_path("x"), FileFormat::kBinary);
}

TEST(ValidateTest, LabelOutOfRange) {
  EmbeddingSet s = make_embedding_set(Matrix::from_rows({{1}, {2}}), {0, 1});
  s.class_count = 1;
  EXPECT_THROW(validate(s), Error);
}

TEST(L2Test, Examples) {
  EXPECT_EQ(l2_normalize(make_embedding_set(Matrix::from_rows({{3, 4}}))).vectors,
            Matrix::from_rows({{0.6, 0.8}}));
  const Matrix unit = l2_normalize(make_embedding_set(Matrix::from_rows({{0.6, 0.8}}))).vectors;
  EXPECT_NEAR(unit(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(unit(0, 1), 0.8, 1e-15);
  try {
    l2_normalize(make_embedding_set(Matrix::from_rows({{0, 0}})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
    EXPECT_NE(std::string(e.what()).find("zero vector not normalizable"), std::string::npos);
  }
}

TEST(L2Test, IdempotentAndUnitNorm) {
  const EmbeddingSet once = l2_normalize(make_embedding_set(testing::random_matrix(30, 12, 4)));
  const EmbeddingSet twice = l2_normalize(once);
  EXPECT_LE(max_abs_diff(once.vectors, twice.vectors), 1e-12);
  for (Index r = 0; r < once.size(); ++r) {
    double s = 0;
    for (double x : once.vectors.row(r)) s += x * x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(PlcTest, Examples) {
  const Matrix single = plc_preprocess(make_embedding_set(Matrix::from_rows({{4, 0}}))).vectors;
  EXPECT_EQ(single, Matrix::from_rows({{0, 0}}));
  const Matrix two = plc_preprocess(make_embedding_set(Matrix::from_rows({{1, 0}, {0, 1}}))).vectors;
  EXPECT_EQ(two, Matrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}}));
  try {
    plc_preprocess(make_embedding_set(Matrix::from_rows({{1, -0.1}})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeFeature);
    EXPECT_NE(std::string(e.what()).find("PLC requires nonnegative features"), std::string::npos);
  }
}

TEST(PlcTest, ZeroMeanAndOrder) {
  Matrix m = testing::random_matrix(25, 9, 5);
  for (double& x : m.values()) x = std::abs(x);
  const EmbeddingSet out = plc_preprocess(make_embedding_set(m));
  for (Index c = 0; c < out.dim(); ++c) {
    double mean = 0;
    for (Index r = 0; r < out.size(); ++r) mean += out.vectors(r, c);
    EXPECT_NEAR(mean / out.size(), 0.0, 1e-9);
  }
  // sqrt -> l2 -> center, recomputed directly.
  oracle::Dense d = testing::to_dense(m);
  for (auto& row : d) {
    double s = 0;
    for (double& x : row) s += (x = std::sqrt(x)) * x;
    for (double& x : row) x /= std::sqrt(s);
  }
  for (Index c = 0; c < m.cols(); ++c) {
    double mean = 0;
    for (auto& row : d) mean += row[c];
    mean /= d.size();
    for (auto& row : d) row[c] -= mean;
  }
  EXPECT_LE(max_abs_diff(out.vectors, testing::from_dense(d)), 1e-14);
}

TEST(PreprocessTest, NeverChangesShape) {
  Matrix m = testing::random_matrix(6, 3, 8);
  for (double& x : m.values()) x = std::abs(x) + 0.1;
  for (PreprocessMode mode : {PreprocessMode::kNone, PreprocessMode::kL2, PreprocessMode::kPlc}) {
    const EmbeddingSet out = preprocess(make_embedding_set(m), mode);
    EXPECT_EQ(out.size(), 6u);
    EXPECT_EQ(out.dim(), 3u);
  }
  EXPECT_EQ(preprocess(make_embedding_set(m), PreprocessMode::kNone).vectors, m);
  EXPECT_EQ(parse_preprocess_mode("plc"), PreprocessMode::kPlc);
  EXPECT_THROW(parse_preprocess_mode("pca"), Error);
}

TEST(GatherTest, KeepsOrderAndLabels) {
  const EmbeddingSet s = make_embedding_set(Matrix::from_rows({{1}, {2}, {3}}), {0, 1, 2});
  const std::vector<Index> idx = {2, 0};
  const EmbeddingSet g = gather_rows(s, idx);
  EXPECT_EQ(g.vectors, Matrix::from_rows({{3}, {1}}));
  EXPECT_EQ(g.labels, (std::vector<std::int64_t>{2, 0}));
}

}  // namespace
}  // namespace a2lp
