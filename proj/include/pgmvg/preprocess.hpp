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

#ifndef PGMVG_PREPROCESS_HPP
#define PGMVG_PREPROCESS_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pgmvg/core_types.hpp"
#include "pgmvg/knn.hpp"

namespace pgmvg {

/// Mean row of a matrix.
inline std::vector<double> mean_row(const EmbeddingMatrix& m) {
  std::vector<double> mean(m.dim(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t d = 0; d < m.dim(); ++d) mean[d] += r[d];
  }
  for (double& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

/// Center alignment: subtracts the domain mean and renormalizes each row.
inline EmbeddingMatrix statistic_adapt(const EmbeddingMatrix& m) {
  if (m.rows() < 2) {
    throw Error(ErrorCode::kDegenerateCenter, "need at least two rows");
  }
  const std::vector<double> mean = mean_row(m);
  std::vector<double> out(m.data());
  const std::size_t dim = m.dim();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      out[i * dim + d] -= mean[d];
      sq += out[i * dim + d] * out[i * dim + d];
    }
    if (std::sqrt(sq) < 1e-12) {
      throw Error(ErrorCode::kDegenerateCenter,
                  "row " + std::to_string(i) + " coincides with the mean");
    }
  }
  return normalize_rows(EmbeddingMatrix(m.model_id(), m.rows(), dim, std::move(out)));
}

enum class RemovalReason { kHighDegree };

struct RemovalReport {
  std::vector<Index> removed;  // sorted, deduplicated union over models
  std::vector<std::size_t> per_model_counts;
  RemovalReason reason = RemovalReason::kHighDegree;
};

/// Flags utterance i of a model when its similarity to its rank-th neighbor
/// exceeds threshold. Tables shallower than rank fall back to their deepest
/// neighbor. Returns the union over models.
inline RemovalReport find_high_degree_outliers(
    std::span<const NeighborTable> models, std::size_t rank, double threshold) {
  RemovalReport report;
  std::vector<bool> flagged;
  for (const NeighborTable& t : models) {
    if (flagged.size() < t.rows()) flagged.resize(t.rows(), false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const auto list = t.neighbors(static_cast<Index>(i));
      if (list.empty()) continue;
      const std::size_t pos =
          std::min(std::max<std::size_t>(rank, 1), list.size()) - 1;
      if (list[pos].similarity > threshold) {
        ++count;
        flagged[i] = true;
      }
    }
    report.per_model_counts.push_back(count);
  }
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (flagged[i]) report.removed.push_back(static_cast<Index>(i));
  }
  return report;
}

}  // namespace pgmvg

#endif  // PGMVG_PREPROCESS_HPP
