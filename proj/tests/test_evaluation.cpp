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

#include <cmath>
#include <map>
#include <random>

#include "pgmvg/evaluation.hpp"
#include "test_support.hpp"

namespace pgmvg {
namespace {

TEST(PairwiseScores, Identity) {
  const std::vector<int> t = {0, 0, 1, 1, 2, 2, 2};
  const PairwiseScores s = pairwise_scores(t, t);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.f, 1.0);
}

TEST(PairwiseScores, OneBigClass) {
  // Two truth classes of size 5, predicted as one class.
  std::vector<int> truth(10), pred(10, 0);
  for (int i = 0; i < 10; ++i) truth[i] = i / 5;
  // Brute force over pairs.
  int same_pred = 0, both = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      same_pred += pred[i] == pred[j];
      both += pred[i] == pred[j] && truth[i] == truth[j];
    }
  }
  const PairwiseScores s = pairwise_scores(pred, truth);
  EXPECT_DOUBLE_EQ(s.precision, static_cast<double>(both) / same_pred);
  EXPECT_DOUBLE_EQ(s.precision, 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.f, 2.0 * (4.0 / 9.0) / (4.0 / 9.0 + 1.0));
}

TEST(PairwiseScores, SingletonsHaveNoPairs) {
  const std::vector<int> pred = {0, 1, 2, 3};
  const std::vector<int> truth = {0, 0, 1, 1};
  try {
    pairwise_scores(pred, truth);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoLabeledPairs);
  }
}

TEST(PairwiseScores, UnlabeledExcluded) {
  const std::vector<int> pred = {0, 0, -1, 1, 1, 0};
  const std::vector<int> truth = {5, 5, 5, 7, 7, -1};
  const PairwiseScores s = pairwise_scores(pred, truth);
  EXPECT_DOUBLE_EQ(s.f, 1.0);
}

TEST(PairwiseScores, PermutationInvariant) {
  const std::vector<int> pred = {0, 0, 1, 1, 1, 2, 2, 0};
  const std::vector<int> truth = {0, 1, 1, 1, 2, 2, 2, 0};
  const std::vector<int> pred_perm = {2, 2, 0, 0, 0, 1, 1, 2};
  EXPECT_DOUBLE_EQ(pairwise_scores(pred, truth).f, pairwise_scores(pred_perm, truth).f);
  EXPECT_LT(pairwise_scores(pred, truth).f, 1.0);
}

TEST(Nmi, IdentityAndPermutation) {
  const std::vector<int> t = {0, 0, 1, 1, 2, 2, 2, 3};
  EXPECT_NEAR(nmi(t, t), 1.0, 1e-12);
  const std::vector<int> p = {3, 3, 0, 0, 1, 1, 1, 2};
  EXPECT_NEAR(nmi(p, t), 1.0, 1e-12);
}

TEST(Nmi, MatchesEntropyOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> five(0, 4), three(0, 2);
  std::vector<int> truth(100), pred(100);
  for (int i = 0; i < 100; ++i) {
    truth[i] = five(rng);
    pred[i] = truth[i] * 3 + three(rng);  // refinement
    if (i % 7 == 0) pred[i] = three(rng);  // plus some noise
  }
  double joint[20][5] = {};
  double pp[20] = {}, pt[5] = {};
  for (int i = 0; i < 100; ++i) {
    joint[pred[i]][truth[i]] += 0.01;
    pp[pred[i]] += 0.01;
    pt[truth[i]] += 0.01;
  }
  double hp = 0, ht = 0, mi = 0;
  for (double p : pp) {
    if (p > 0) hp -= p * std::log(p);
  }
  for (double p : pt) {
    if (p > 0) ht -= p * std::log(p);
  }
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 5; ++b) {
      if (joint[a][b] > 0) mi += joint[a][b] * std::log(joint[a][b] / (pp[a] * pt[b]));
    }
  }
  const double expected = mi / ((hp + ht) / 2.0);
  const double got = nmi(pred, truth);
  EXPECT_NEAR(got, expected, 1e-9);
  EXPECT_GT(got, 0.0);
  EXPECT_LT(got, 1.0);
}

TEST(Nmi, DegenerateLabels) {
  const std::vector<int> one = {0, 0, 0, 0};
  const std::vector<int> two = {0, 0, 1, 1};
  try {
    nmi(one, two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateLabels);
  }
  EXPECT_THROW(nmi(two, one), Error);
}

TEST(ClusterReport, CoverageCountsTruthLabeledOnly) {
  const std::vector<int> pred = {0, 0, -1, 1, 1, -1};
  const std::vector<int> truth = {0, 0, 0, 1, 1, -1};
  const ClusterReport r = cluster_report(pred, truth);
  EXPECT_DOUBLE_EQ(r.coverage, 4.0 / 5.0);
  EXPECT_EQ(r.num_pred_classes, 2u);
  EXPECT_EQ(r.num_true_classes, 2u);
  EXPECT_DOUBLE_EQ(r.pairwise_f, 1.0);
  EXPECT_NE(format_report(r).find("coverage\t0.800000\n"), std::string::npos);
}

}  // namespace
}  // namespace pgmvg
