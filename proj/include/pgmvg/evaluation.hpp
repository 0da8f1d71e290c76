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

#ifndef PGMVG_EVALUATION_HPP
#define PGMVG_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>

#include "pgmvg/core_types.hpp"

namespace pgmvg {

struct PairwiseScores {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct ClusterReport {
  double pairwise_precision = 0.0;
  double pairwise_recall = 0.0;
  double pairwise_f = 0.0;
  double nmi = 0.0;
  std::size_t num_pred_classes = 0;
  std::size_t num_true_classes = 0;
  double coverage = 0.0;
};

namespace detail {

// Joint and marginal counts over utterances where both labels are >= 0.
struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pred;
  std::map<int, double> truth;
  double total = 0.0;
};

inline Contingency contingency(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::kCountMismatch, "prediction and truth lengths differ");
  }
  Contingency c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0) continue;
    c.joint[{pred[i], truth[i]}] += 1.0;
    c.pred[pred[i]] += 1.0;
    c.truth[truth[i]] += 1.0;
    c.total += 1.0;
  }
  return c;
}

inline double pairs(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace detail

/// Pair-counting precision/recall over utterances labeled on both sides.
inline PairwiseScores pairwise_scores(std::span<const int> pred, std::span<const int> truth) {
  const auto c = detail::contingency(pred, truth);
  double same_both = 0.0, same_pred = 0.0, same_truth = 0.0;
  for (const auto& [key, n] : c.joint) same_both += detail::pairs(n);
  for (const auto& [key, n] : c.pred) same_pred += detail::pairs(n);
  for (const auto& [key, n] : c.truth) same_truth += detail::pairs(n);
  if (same_pred == 0.0 || same_truth == 0.0) {
    throw Error(ErrorCode::kNoLabeledPairs, "no same-class pairs among labeled utterances");
  }
  PairwiseScores s;
  s.precision = same_both / same_pred;
  s.recall = same_both / same_truth;
  s.f = s.precision + s.recall > 0.0
            ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
            : 0.0;
  return s;
}

/// Normalized mutual information, I(P;T) / ((H(P) + H(T)) / 2).
inline double nmi(std::span<const int> pred, std::span<const int> truth) {
  const auto c = detail::contingency(pred, truth);
  if (c.pred.size() < 2 || c.truth.size() < 2) {
    throw Error(ErrorCode::kDegenerateLabels, "NMI needs at least two classes on each side");
  }
  auto entropy = [&](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [key, n] : counts) {
      const double p = n / c.total;
      h -= p * std::log(p);
    }
    return h;
  };
  double mi = 0.0;
  for (const auto& [key, n] : c.joint) {
    const double pxy = n / c.total;
    const double px = c.pred.at(key.first) / c.total;
    const double py = c.truth.at(key.second) / c.total;
    mi += pxy * std::log(pxy / (px * py));
  }
  const double denom = 0.5 * (entropy(c.pred) + entropy(c.truth));
  return std::clamp(mi / denom, 0.0, 1.0);
}

inline ClusterReport cluster_report(std::span<const int> pred, std::span<const int> truth) {
  ClusterReport r;
  const PairwiseScores s = pairwise_scores(pred, truth);
  r.pairwise_precision = s.precision;
  r.pairwise_recall = s.recall;
  r.pairwise_f = s.f;
  r.nmi = nmi(pred, truth);
  std::map<int, int> pred_classes, true_classes;
  std::size_t covered = 0, scored = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= 0) pred_classes[pred[i]];
    if (truth[i] >= 0) {
      true_classes[truth[i]];
      ++scored;
      covered += pred[i] >= 0;
    }
  }
  r.num_pred_classes = pred_classes.size();
  r.num_true_classes = true_classes.size();
  r.coverage = scored ? static_cast<double>(covered) / static_cast<double>(scored) : 0.0;
  return r;
}

inline std::string format_report(const ClusterReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "pairwise_precision\t" << r.pairwise_precision << "\n"
     << "pairwise_recall\t" << r.pairwise_recall << "\n"
     << "pairwise_f\t" << r.pairwise_f << "\n"
     << "nmi\t" << r.nmi << "\n"
     << "num_pred_classes\t" << r.num_pred_classes << "\n"
     << "num_true_classes\t" << r.num_true_classes << "\n"
     << "coverage\t" << r.coverage << "\n";
  return os.str();
}

}  // namespace pgmvg

#endif  // PGMVG_EVALUATION_HPP
