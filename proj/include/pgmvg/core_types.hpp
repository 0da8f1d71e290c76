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

#ifndef PGMVG_CORE_TYPES_HPP
#define PGMVG_CORE_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pgmvg/error.hpp"

namespace pgmvg {

/// Utterance index into an embedding matrix / utterance set.
using Index = std::uint32_t;

/// Row-major M x D embedding matrix produced by one extractor.
///
/// Values are held in double precision; the on-disk format stores 32-bit
/// floats, which widen losslessly.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(int model_id, std::size_t rows, std::size_t dim,
                  std::vector<double> data)
      : model_id_(model_id), rows_(rows), dim_(dim), data_(std::move(data)) {
    if (rows_ < 1 || dim_ < 2) {
      throw Error(ErrorCode::kShapeMismatch,
                  "embedding matrix needs rows >= 1 and dim >= 2, got " +
                      std::to_string(rows_) + "x" + std::to_string(dim_));
    }
    if (data_.size() != rows_ * dim_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "payload has " + std::to_string(data_.size()) +
                      " values, expected " + std::to_string(rows_ * dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "row " + std::to_string(i / dim_) + ", col " +
                        std::to_string(i % dim_));
      }
    }
  }

  int model_id() const noexcept { return model_id_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  int model_id_ = 0;
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Sequential double-precision dot product. Every similarity in the library
/// goes through this so that all code paths agree bit for bit.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Scales every row to unit Euclidean length.
inline EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  std::vector<double> out(m.data());
  const std::size_t dim = m.dim();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double n = norm(m.row(i));
    if (n < 1e-12) {
      throw Error(ErrorCode::kZeroVectorRow, "row " + std::to_string(i));
    }
    for (std::size_t d = 0; d < dim; ++d) out[i * dim + d] /= n;
  }
  return EmbeddingMatrix(m.model_id(), m.rows(), dim, std::move(out));
}

/// Utterance identifiers plus the active mask (false = filtered out).
struct UtteranceSet {
  std::vector<std::string> ids;
  std::vector<bool> active;

  UtteranceSet() = default;

  explicit UtteranceSet(std::vector<std::string> utterance_ids)
      : ids(std::move(utterance_ids)), active(ids.size(), true) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i].empty()) {
        throw Error(ErrorCode::kEmptyId, "utterance " + std::to_string(i));
      }
      if (!seen.insert(ids[i]).second) {
        throw Error(ErrorCode::kDuplicateId, ids[i]);
      }
    }
  }

  std::size_t size() const noexcept { return ids.size(); }

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  }
};

/// Per-utterance pseudo-labels; -1 marks unlabeled or removed utterances.
struct PseudoLabels {
  std::vector<int> label;
  int num_classes = 0;

  std::size_t size() const noexcept { return label.size(); }

  std::size_t labeled_count() const {
    return static_cast<std::size_t>(
        std::count_if(label.begin(), label.end(), [](int l) { return l >= 0; }));
  }

  friend bool operator==(const PseudoLabels&, const PseudoLabels&) = default;
};

/// Renumbers non-negative labels to 0..C-1 in order of first appearance.
inline PseudoLabels densify(const std::vector<int>& raw) {
  PseudoLabels out;
  out.label.assign(raw.size(), -1);
  std::vector<int> remap;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int l = raw[i];
    if (l < 0) continue;
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(l + 1, -1);
    if (remap[l] < 0) remap[l] = out.num_classes++;
    out.label[i] = remap[l];
  }
  return out;
}

/// All tunables of a clustering run.
struct RunConfig {
  int k_init = 5;
  int k_step = 5;
  int k_max = 100;
  double th_high = 0.4;
  double th_low = 0.2;
  double epsilon = 0.05;  // CASE 3 overlap slack
  int min_cluster_size = 10;
  double stop_new_node_frac = 0.01;
  double stop_cluster_delta_frac = 0.01;
  int outlier_rank = 500;
  double outlier_threshold = 0.8;
  double sigma_floor = 1e-4;
  int em_max_iters = 200;
  double em_tol = 1e-6;
  std::uint64_t seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

class ValidatedConfig;
ValidatedConfig validate_config(const RunConfig& c);

/// A RunConfig whose invariants have been checked. Only validate_config
/// can produce one.
class ValidatedConfig {
 public:
  const RunConfig& get() const noexcept { return config_; }
  const RunConfig* operator->() const noexcept { return &config_; }

 private:
  explicit ValidatedConfig(const RunConfig& c) : config_(c) {}
  friend ValidatedConfig validate_config(const RunConfig& c);

  RunConfig config_;
};

inline ValidatedConfig validate_config(const RunConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, what);
  };
  if (!(c.th_low > 0.0)) fail("th_low: must be > 0");
  if (!(c.th_low < c.th_high)) fail("th_low: must satisfy th_low < th_high");
  if (!(c.th_high < 1.0)) fail("th_high: must be < 1");
  if (c.k_init < 1) fail("k_init: must be >= 1");
  if (c.k_step < 1) fail("k_step: must be >= 1");
  if (c.k_max < c.k_init) fail("k_max: must be >= k_init");
  if (c.min_cluster_size < 2) fail("min_cluster_size: must be >= 2");
  if (!(c.epsilon >= 0.0)) fail("epsilon: must be >= 0");
  if (!(c.sigma_floor > 0.0)) fail("sigma_floor: must be > 0");
  if (!(c.stop_new_node_frac >= 0.0)) fail("stop_new_node_frac: must be >= 0");
  if (!(c.stop_cluster_delta_frac >= 0.0)) {
    fail("stop_cluster_delta_frac: must be >= 0");
  }
  if (c.outlier_rank < 1) fail("outlier_rank: must be >= 1");
  if (!std::isfinite(c.outlier_threshold)) fail("outlier_threshold: must be finite");
  if (c.em_max_iters < 1) fail("em_max_iters: must be >= 1");
  if (!(c.em_tol > 0.0)) fail("em_tol: must be > 0");
  return ValidatedConfig(c);
}

}  // namespace pgmvg

#endif  // PGMVG_CORE_TYPES_HPP
