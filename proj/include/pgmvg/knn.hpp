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

#ifndef PGMVG_KNN_HPP
#define PGMVG_KNN_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pgmvg/core_types.hpp"
#include "pgmvg/parallel.hpp"

namespace pgmvg {

struct Neighbor {
  Index index = 0;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ranking order: higher similarity first, ties by ascending index.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.index < b.index;
}

/// Exact cosine kNN lists for one model, stored to a fixed depth.
///
/// Rows of inactive utterances are empty. Every active row holds exactly
/// k_computed() entries, where k_computed = min(requested depth, active - 1).
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(int model_id, std::size_t rows, std::size_t k_computed,
                std::vector<bool> active)
      : model_id_(model_id),
        rows_(rows),
        k_computed_(k_computed),
        active_(std::move(active)),
        entries_(rows * k_computed) {}

  int model_id() const noexcept { return model_id_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t k_computed() const noexcept { return k_computed_; }
  bool is_active(Index i) const { return active_[i]; }
  const std::vector<bool>& active() const noexcept { return active_; }

  /// Whole stored list of utterance i (empty for inactive rows).
  std::span<const Neighbor> neighbors(Index i) const {
    if (!active_[i]) return {};
    return {entries_.data() + static_cast<std::size_t>(i) * k_computed_,
            k_computed_};
  }

  std::span<Neighbor> mutable_row(Index i) {
    return {entries_.data() + static_cast<std::size_t>(i) * k_computed_,
            k_computed_};
  }

  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

 private:
  int model_id_ = 0;
  std::size_t rows_ = 0;
  std::size_t k_computed_ = 0;
  std::vector<bool> active_;
  std::vector<Neighbor> entries_;
};

/// First k entries of utterance i's neighbor list.
inline std::span<const Neighbor> topk_slice(const NeighborTable& t, Index i,
                                            std::size_t k) {
  if (k > t.k_computed()) {
    throw Error(ErrorCode::kDepthExceeded,
                "requested k=" + std::to_string(k) + " but table depth is " +
                    std::to_string(t.k_computed()));
  }
  return t.neighbors(i).first(std::min(k, t.neighbors(i).size()));
}

struct KnnOptions {
  std::size_t threads = 1;
  std::size_t query_block = 64;
  std::size_t base_block = 256;
};

/// Builds the exact top-k_depth cosine neighbor table over active rows.
///
/// Query rows are processed in blocks; for each block the similarity tile
/// against a block of base rows is filled before moving on, so base rows are
/// reused from cache across the queries of the block. Each similarity is the
/// same sequential dot product regardless of blocking, which keeps the result
/// independent of block sizes and thread count.
inline NeighborTable build_neighbor_table(const EmbeddingMatrix& m,
                                          const std::vector<bool>& mask,
                                          std::size_t k_depth,
                                          const KnnOptions& opts = {}) {
  if (mask.size() != m.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "mask length differs from row count");
  }
  if (k_depth < 1) {
    throw Error(ErrorCode::kDepthExceeded, "k_depth must be >= 1");
  }
  std::vector<Index> active_rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (mask[i]) active_rows.push_back(static_cast<Index>(i));
  }
  const std::size_t num_active = active_rows.size();
  if (num_active < 2) {
    throw Error(ErrorCode::kTooFewActive,
                std::to_string(num_active) + " active utterances");
  }
  const std::size_t depth = std::min(k_depth, num_active - 1);
  NeighborTable table(m.model_id(), m.rows(), depth, mask);

  const std::size_t qb = std::max<std::size_t>(1, opts.query_block);
  const std::size_t bb = std::max<std::size_t>(1, opts.base_block);
  const std::size_t num_blocks = (num_active + qb - 1) / qb;

  parallel_for(num_blocks, opts.threads, [&](std::size_t block) {
    const std::size_t q_begin = block * qb;
    const std::size_t q_end = std::min(num_active, q_begin + qb);
    const std::size_t q_count = q_end - q_begin;
    // sims[q * num_active + j] = sim(active_rows[q_begin + q], active_rows[j])
    std::vector<double> sims(q_count * num_active);
    for (std::size_t b_begin = 0; b_begin < num_active; b_begin += bb) {
      const std::size_t b_end = std::min(num_active, b_begin + bb);
      for (std::size_t q = 0; q < q_count; ++q) {
        const auto qrow = m.row(active_rows[q_begin + q]);
        double* out = sims.data() + q * num_active;
        for (std::size_t j = b_begin; j < b_end; ++j) {
          out[j] = dot(qrow, m.row(active_rows[j]));
        }
      }
    }
    std::vector<Neighbor> candidates;
    candidates.reserve(num_active - 1);
    for (std::size_t q = 0; q < q_count; ++q) {
      const std::size_t self = q_begin + q;
      candidates.clear();
      const double* row_sims = sims.data() + q * num_active;
      for (std::size_t j = 0; j < num_active; ++j) {
        if (j == self) continue;
        candidates.push_back({active_rows[j], row_sims[j]});
      }
      std::partial_sort(candidates.begin(), candidates.begin() + depth,
                        candidates.end(), ranks_before);
      auto dst = table.mutable_row(active_rows[self]);
      std::copy(candidates.begin(), candidates.begin() + depth, dst.begin());
    }
  });
  return table;
}

}  // namespace pgmvg

#endif  // PGMVG_KNN_HPP
