// Copyright 2026 The pgmvg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <limits>

#include "pgmvg/io_formats.hpp"
#include "test_support.hpp"

namespace pgmvg {
namespace {

using testing::slurp;
using testing::spit;
using testing::TempDir;

std::string header(const char* magic, std::uint32_t version, std::uint64_t rows,
                   std::uint64_t dim) {
  std::string h(magic, 4);
  for (int b = 0; b < 4; ++b) h.push_back(static_cast<char>((version >> (8 * b)) & 0xFF));
  for (int b = 0; b < 8; ++b) h.push_back(static_cast<char>((rows >> (8 * b)) & 0xFF));
  for (int b = 0; b < 8; ++b) h.push_back(static_cast<char>((dim >> (8 * b)) & 0xFF));
  return h;
}

std::string le_float(float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  std::string s;
  for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  return s;
}

TEST(ReadEmbeddings, SmallestFile) {
  TempDir dir;
  std::string bytes = header("PGMV", 1, 2, 3);
  for (float f : {1.0f, 2.0f, 3.0f, -0.5f, 0.25f, 8.0f}) bytes += le_float(f);
  ASSERT_EQ(bytes.size(), 24u + 24u);
  spit(dir / "m.pgmv", bytes);
  const EmbeddingMatrix m = read_embeddings(dir / "m.pgmv");
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.data(), (std::vector<double>{1, 2, 3, -0.5, 0.25, 8}));
}

TEST(ReadEmbeddings, BadMagic) {
  TempDir dir;
  std::string bytes = header("XXXX", 1, 1, 2) + le_float(1) + le_float(0);
  spit(dir / "m.pgmv", bytes);
  try {
    read_embeddings(dir / "m.pgmv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadMagic);
  }
}

TEST(ReadEmbeddings, TruncatedPayload) {
  TempDir dir;
  std::string bytes = header("PGMV", 1, 2, 3);
  for (int i = 0; i < 5; ++i) bytes += le_float(1.0f);
  spit(dir / "m.pgmv", bytes);
  try {
    read_embeddings(dir / "m.pgmv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncatedFile);
  }
  spit(dir / "h.pgmv", std::string("PGMV\x01\x00", 6));
  try {
    read_embeddings(dir / "h.pgmv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncatedFile);
  }
}

TEST(ReadEmbeddings, NonFiniteValueReportsPosition) {
  TempDir dir;
  std::string bytes = header("PGMV", 1, 2, 2) + le_float(1) + le_float(0) + le_float(0) +
                      le_float(std::numeric_limits<float>::infinity());
  spit(dir / "m.pgmv", bytes);
  try {
    read_embeddings(dir / "m.pgmv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("row 1, col 1"), std::string::npos);
  }
}

TEST(ReadEmbeddings, UnsupportedVersion) {
  EXPECT_THROW(decode_embeddings(header("PGMV", 2, 1, 2) + le_float(1) + le_float(1)), Error);
}

TEST(Embeddings, RoundTripIsBitExact) {
  TempDir dir;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-3.0f, 3.0f);
    std::vector<double> data(17 * 5);
    for (double& v : data) v = u(rng);  // float-representable
    const EmbeddingMatrix m(0, 17, 5, data);
    write_embeddings(dir / "rt.pgmv", m);
    EXPECT_EQ(read_embeddings(dir / "rt.pgmv"), m);
    const std::string bytes = slurp(dir / "rt.pgmv");
    EXPECT_EQ(bytes.size(), 24u + 17u * 5u * 4u);
    EXPECT_EQ(encode_embeddings(decode_embeddings(bytes)), bytes);
  }
}

TEST(ReadIds, PreservesOrder) {
  TempDir dir;
  spit(dir / "u.ids", "c\na\nb\n");
  const UtteranceSet ids = read_ids(dir / "u.ids", 3);
  EXPECT_EQ(ids.ids, (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_EQ(ids.active, (std::vector<bool>{true, true, true}));
}

TEST(ReadIds, Errors) {
  TempDir dir;
  auto code_of = [&](const std::string& text, std::size_t expected) {
    spit(dir / "u.ids", text);
    try {
      read_ids(dir / "u.ids", expected);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  EXPECT_EQ(code_of("a\nb\na\n", 3), ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of("a\nb\n", 3), ErrorCode::kCountMismatch);
  EXPECT_EQ(code_of("a\n\nb\n", 3), ErrorCode::kEmptyId);
  EXPECT_THROW(read_ids(dir / "missing.ids", 1), Error);
}

TEST(WriteLabels, ExactBytes) {
  TempDir dir;
  PseudoLabels labels;
  labels.label = {0, -1};
  labels.num_classes = 1;
  write_labels(dir / "l.tsv", UtteranceSet({"a", "b"}), labels);
  EXPECT_EQ(slurp(dir / "l.tsv"), "a\t0\nb\t-1\n");
}

TEST(WriteLabels, EmptySetWritesEmptyFile) {
  TempDir dir;
  write_labels(dir / "l.tsv", UtteranceSet(), PseudoLabels{});
  EXPECT_EQ(slurp(dir / "l.tsv"), "");
  EXPECT_TRUE(read_labels(dir / "l.tsv").labels.empty());
}

TEST(WriteLabels, RoundTrip) {
  TempDir dir;
  const UtteranceSet ids({"u1", "u2", "u3", "u4"});
  PseudoLabels labels;
  labels.label = {2, 0, -1, 2};
  labels.num_classes = 3;
  write_labels(dir / "l.tsv", ids, labels);
  const LabelFile back = read_labels(dir / "l.tsv");
  EXPECT_EQ(back.ids.ids, ids.ids);
  EXPECT_EQ(back.labels, labels.label);
  EXPECT_THROW(format_labels(ids, PseudoLabels{}), Error);
}

TEST(Config, ParsesCommentsAndOverrides) {
  const RunConfig c = parse_config(
      "# run settings\n"
      "k_init = 3\n"
      "th_high=0.5   # inline comment\n"
      "\n"
      "  min_cluster_size = 4\n"
      "seed = 99\n");
  EXPECT_EQ(c.k_init, 3);
  EXPECT_DOUBLE_EQ(c.th_high, 0.5);
  EXPECT_EQ(c.min_cluster_size, 4);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.k_step, 5);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("unknown_key = 1\n"), Error);
  EXPECT_THROW(parse_config("k_init = five\n"), Error);
  EXPECT_THROW(parse_config("k_init 5\n"), Error);
}

TEST(Config, FormatParsesBack) {
  RunConfig c;
  c.th_low = 0.123456789012345;
  c.k_max = 42;
  c.seed = 7;
  EXPECT_EQ(parse_config(format_config(c)), c);
  const std::string commented = format_config(c, "# ");
  EXPECT_EQ(commented.rfind("# k_init = 5\n", 0), 0u);
}

}  // namespace
}  // namespace pgmvg
