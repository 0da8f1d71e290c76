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

#include "pgmvg/knn.hpp"
#include "test_support.hpp"

namespace pgmvg {
namespace {

void expect_matches_oracle(const NeighborTable& t, const EmbeddingMatrix& m,
                           const std::vector<bool>& mask, std::size_t k) {
  const auto oracle = testing::brute_force_knn(m, mask, k);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto got = t.neighbors(static_cast<Index>(i));
    ASSERT_EQ(got.size(), oracle[i].size()) << "row " << i;
    for (std::size_t r = 0; r < got.size(); ++r) {
      EXPECT_EQ(got[r].index, oracle[i][r].index) << "row " << i << " rank " << r;
      EXPECT_NEAR(got[r].similarity, oracle[i][r].similarity, 1e-6);
    }
  }
}

TEST(BuildNeighborTable, OrthonormalRows) {
  const EmbeddingMatrix m(0, 3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const NeighborTable t = build_neighbor_table(m, {true, true, true}, 2);
  EXPECT_EQ(t.k_computed(), 2u);
  for (Index i = 0; i < 3; ++i) {
    const auto list = t.neighbors(i);
    ASSERT_EQ(list.size(), 2u);
    for (const Neighbor& n : list) {
      EXPECT_NE(n.index, i);
      EXPECT_EQ(n.similarity, 0.0);
    }
    EXPECT_LT(list[0].index, list[1].index);
  }
}

TEST(BuildNeighborTable, TieBrokenByIndex) {
  const EmbeddingMatrix m(0, 3, 2, {1, 0, 1, 0, 0, 1});
  const NeighborTable t = build_neighbor_table(m, {true, true, true}, 1);
  EXPECT_EQ(t.neighbors(0)[0], (Neighbor{1, 1.0}));
  EXPECT_EQ(t.neighbors(1)[0], (Neighbor{0, 1.0}));
  EXPECT_EQ(t.neighbors(2)[0], (Neighbor{0, 0.0}));
}

TEST(BuildNeighborTable, MatchesBruteForce) {
  const EmbeddingMatrix m = testing::random_unit_matrix(200, 16, 42);
  const std::vector<bool> all(200, true);
  expect_matches_oracle(build_neighbor_table(m, all, 10), m, all, 10);
}

TEST(BuildNeighborTable, ClusteredDataWithTiesMatchesBruteForce) {
  // Duplicated rows create exact similarity ties.
  const EmbeddingMatrix base = testing::random_unit_matrix(50, 8, 3);
  std::vector<double> data(base.data());
  data.insert(data.end(), base.data().begin(), base.data().end());
  const EmbeddingMatrix m(0, 100, 8, data);
  const std::vector<bool> all(100, true);
  expect_matches_oracle(build_neighbor_table(m, all, 12), m, all, 12);
}

TEST(BuildNeighborTable, IndependentOfBlocksAndThreads) {
  const EmbeddingMatrix m = testing::random_unit_matrix(333, 12, 9);
  std::vector<bool> mask(333, true);
  mask[5] = mask[100] = mask[222] = false;
  const NeighborTable reference = build_neighbor_table(m, mask, 25);
  for (std::size_t threads : {1u, 2u, 4u}) {
    for (std::size_t qb : {1u, 7u, 64u, 500u}) {
      for (std::size_t bb : {1u, 13u, 256u}) {
        KnnOptions opts{threads, qb, bb};
        EXPECT_EQ(build_neighbor_table(m, mask, 25, opts), reference)
            << threads << " " << qb << " " << bb;
      }
    }
  }
}

TEST(BuildNeighborTable, MaskExcludesRowsAndNeighbors) {
  const EmbeddingMatrix m = testing::random_unit_matrix(60, 8, 17);
  std::vector<bool> mask(60, true);
  for (std::size_t i = 0; i < 60; i += 4) mask[i] = false;
  const NeighborTable t = build_neighbor_table(m, mask, 100);
  EXPECT_EQ(t.k_computed(), 44u);
  for (Index i = 0; i < 60; ++i) {
    if (!mask[i]) {
      EXPECT_TRUE(t.neighbors(i).empty());
      continue;
    }
    for (const Neighbor& n : t.neighbors(i)) {
      EXPECT_TRUE(mask[n.index]);
      EXPECT_NE(n.index, i);
    }
  }
  expect_matches_oracle(t, m, mask, 100);
}

TEST(BuildNeighborTable, ListsSortedAndBounded) {
  const EmbeddingMatrix m = testing::random_unit_matrix(150, 10, 5);
  const NeighborTable t = build_neighbor_table(m, std::vector<bool>(150, true), 30);
  for (Index i = 0; i < 150; ++i) {
    const auto list = t.neighbors(i);
    for (std::size_t r = 0; r < list.size(); ++r) {
      EXPECT_LE(std::abs(list[r].similarity), 1.0 + 1e-6);
      if (r > 0) {
        EXPECT_TRUE(ranks_before(list[r - 1], list[r]));
      }
    }
  }
}

TEST(BuildNeighborTable, SimilarityIsSymmetric) {
  const EmbeddingMatrix m = testing::random_unit_matrix(80, 10, 23);
  const NeighborTable t = build_neighbor_table(m, std::vector<bool>(80, true), 79);
  std::vector<std::vector<double>> sim(80, std::vector<double>(80, 0.0));
  for (Index i = 0; i < 80; ++i) {
    for (const Neighbor& n : t.neighbors(i)) sim[i][n.index] = n.similarity;
  }
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = i + 1; j < 80; ++j) EXPECT_NEAR(sim[i][j], sim[j][i], 1e-6);
  }
}

TEST(BuildNeighborTable, TooFewActive) {
  const EmbeddingMatrix m = testing::random_unit_matrix(5, 4, 1);
  try {
    build_neighbor_table(m, {false, false, true, false, false}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewActive);
  }
  EXPECT_THROW(build_neighbor_table(m, {true, true}, 3), Error);
}

TEST(TopkSlice, WholeEmptyAndPrefix) {
  const EmbeddingMatrix m = testing::random_unit_matrix(40, 6, 2);
  const NeighborTable t = build_neighbor_table(m, std::vector<bool>(40, true), 12);
  for (Index i = 0; i < 40; ++i) {
    const auto whole = topk_slice(t, i, 12);
    EXPECT_EQ(whole.data(), t.neighbors(i).data());
    EXPECT_EQ(whole.size(), 12u);
    EXPECT_TRUE(topk_slice(t, i, 0).empty());
    const auto five = topk_slice(t, i, 5);
    const auto ten = topk_slice(t, i, 10);
    EXPECT_TRUE(std::equal(five.begin(), five.end(), ten.begin()));
  }
}

TEST(TopkSlice, DepthExceeded) {
  const EmbeddingMatrix m = testing::random_unit_matrix(10, 4, 2);
  const NeighborTable t = build_neighbor_table(m, std::vector<bool>(10, true), 20);
  EXPECT_EQ(t.k_computed(), 9u);
  try {
    topk_slice(t, 0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDepthExceeded);
  }
}

}  // namespace
}  // namespace pgmvg
