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

#ifndef PGMVG_SYNTH_HPP
#define PGMVG_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pgmvg/core_types.hpp"
#include "pgmvg/io_formats.hpp"

namespace pgmvg {

/// Synthetic multi-model speaker world.
///
/// Noise vectors are drawn from N(0, I/dim), so a noise scale s perturbs a
/// unit speaker center by a vector of norm about s whatever the dimension.
struct SynthSpec {
  int num_speakers = 50;
  int utts_min = 40;  // per-speaker count drawn uniformly from [utts_min, utts_max]
  int utts_max = 40;
  int dim = 64;
  double intra_noise = 0.45;
  int model_count = 3;
  bool model_rotation = true;
  double model_noise = 0.1;
  double outlier_frac = 0.0;  // junk utterances, as a fraction of clean ones
  double junk_noise = 0.02;
  std::uint64_t seed = 1;
};

struct SynthWorld {
  std::vector<EmbeddingMatrix> models;
  UtteranceSet ids;
  std::vector<int> truth;  // speaker index, -1 for junk
};

inline void validate_synth_spec(const SynthSpec& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kSpecError, what); };
  if (s.num_speakers < 2) fail("num_speakers: must be >= 2");
  if (s.dim < 8) fail("dim: must be >= 8");
  if (s.utts_min < 1 || s.utts_max < s.utts_min) fail("utts_per_speaker: bad range");
  if (s.model_count < 1) fail("model_count: must be >= 1");
  if (!(s.intra_noise >= 0.0) || !(s.model_noise >= 0.0) || !(s.junk_noise >= 0.0)) {
    fail("noise scales must be >= 0");
  }
  if (!(s.outlier_frac >= 0.0)) fail("outlier_frac: must be >= 0");
}

namespace detail {

inline std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim,
                                           double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  const double s = scale / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x = s * normal(rng);
  return v;
}

inline void normalize_in_place(std::vector<double>& v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
}

// Haar-ish random orthogonal matrix (row-major) by Gram-Schmidt on a
// Gaussian matrix.
inline std::vector<double> random_orthogonal(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> q(dim * dim);
  for (double& x : q) x = normal(rng);
  for (std::size_t r = 0; r < dim; ++r) {
    std::span<double> row(q.data() + r * dim, dim);
    for (std::size_t p = 0; p < r; ++p) {
      std::span<const double> prev(q.data() + p * dim, dim);
      const double proj = dot(row, prev);
      for (std::size_t d = 0; d < dim; ++d) row[d] -= proj * prev[d];
    }
    const double n = norm(row);
    for (double& x : row) x /= n;
  }
  return q;
}

inline std::string speaker_utt_id(int speaker, int utt) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "spk%04d-utt%04d", speaker, utt);
  return buf;
}

}  // namespace detail

/// Generates N per-model embedding matrices with shared utterances and
/// ground-truth speakers. Deterministic in spec.seed.
inline SynthWorld generate(const SynthSpec& spec) {
  validate_synth_spec(spec);
  const auto dim = static_cast<std::size_t>(spec.dim);
  std::mt19937_64 rng(spec.seed);

  std::vector<std::vector<double>> centers;
  for (int s = 0; s < spec.num_speakers; ++s) {
    auto c = detail::gaussian_vector(rng, dim, 1.0);
    detail::normalize_in_place(c);
    centers.push_back(std::move(c));
  }
  std::uniform_int_distribution<int> size_dist(spec.utts_min, spec.utts_max);
  std::vector<int> sizes;
  for (int s = 0; s < spec.num_speakers; ++s) sizes.push_back(size_dist(rng));

  struct Utterance {
    std::string id;
    int speaker;
    std::vector<double> base;  // center + intra-speaker noise, before models
  };
  std::vector<Utterance> utts;
  for (int s = 0; s < spec.num_speakers; ++s) {
    for (int j = 0; j < sizes[s]; ++j) {
      auto g = detail::gaussian_vector(rng, dim, spec.intra_noise);
      for (std::size_t d = 0; d < dim; ++d) g[d] += centers[s][d];
      utts.push_back({detail::speaker_utt_id(s, j), s, std::move(g)});
    }
  }
  const auto junk_count =
      static_cast<std::size_t>(std::llround(spec.outlier_frac * static_cast<double>(utts.size())));
  if (junk_count > 0) {
    auto junk_center = detail::gaussian_vector(rng, dim, 1.0);
    detail::normalize_in_place(junk_center);
    for (std::size_t j = 0; j < junk_count; ++j) {
      auto g = detail::gaussian_vector(rng, dim, spec.junk_noise);
      for (std::size_t d = 0; d < dim; ++d) g[d] += junk_center[d];
      char buf[32];
      std::snprintf(buf, sizeof(buf), "junk-%05zu", j);
      utts.push_back({buf, -1, std::move(g)});
    }
  }
  std::shuffle(utts.begin(), utts.end(), rng);

  SynthWorld world;
  std::vector<std::string> ids;
  for (const auto& u : utts) {
    ids.push_back(u.id);
    world.truth.push_back(u.speaker);
  }
  world.ids = UtteranceSet(std::move(ids));

  const std::size_t rows = utts.size();
  for (int n = 0; n < spec.model_count; ++n) {
    std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(n) + 1, std::uint64_t{0x9E3779B9}};
    std::mt19937_64 model_rng(seq);
    std::vector<double> rotation;
    if (spec.model_rotation) rotation = detail::random_orthogonal(model_rng, dim);
    std::vector<double> data(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
      auto x = detail::gaussian_vector(model_rng, dim, spec.model_noise);
      for (std::size_t d = 0; d < dim; ++d) x[d] += utts[i].base[d];
      if (spec.model_rotation) {
        std::vector<double> y(dim);
        for (std::size_t r = 0; r < dim; ++r) {
          y[r] = dot(std::span<const double>(rotation.data() + r * dim, dim), x);
        }
        x = std::move(y);
      }
      detail::normalize_in_place(x);
      std::copy(x.begin(), x.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    world.models.emplace_back(n, rows, dim, std::move(data));
  }
  return world;
}

/// Reads a synth spec from `key = value` text. utts_per_speaker accepts a
/// single count ("40") or an inclusive range ("10-120").
inline SynthSpec parse_synth_spec(const std::string& text, const std::string& origin = "spec") {
  SynthSpec s;
  auto as_int = [](const std::string& k, const std::string& v) {
    return detail::parse_number<int>(k, v);
  };
  auto as_real = [](const std::string& k, const std::string& v) {
    return detail::parse_number<double>(k, v);
  };
  for (const auto& [key, value] : parse_key_values(text, origin)) {
    try {
      if (key == "num_speakers") {
        s.num_speakers = as_int(key, value);
      } else if (key == "utts_per_speaker") {
        const auto dash = value.find('-');
        if (dash == std::string::npos) {
          s.utts_min = s.utts_max = as_int(key, value);
        } else {
          s.utts_min = as_int(key, value.substr(0, dash));
          s.utts_max = as_int(key, value.substr(dash + 1));
        }
      } else if (key == "dim") {
        s.dim = as_int(key, value);
      } else if (key == "intra_noise") {
        s.intra_noise = as_real(key, value);
      } else if (key == "model_count") {
        s.model_count = as_int(key, value);
      } else if (key == "model_rotation") {
        if (value != "true" && value != "false" && value != "1" && value != "0") {
          throw Error(ErrorCode::kSpecError, "model_rotation: expected true/false");
        }
        s.model_rotation = value == "true" || value == "1";
      } else if (key == "model_noise") {
        s.model_noise = as_real(key, value);
      } else if (key == "outlier_frac") {
        s.outlier_frac = as_real(key, value);
      } else if (key == "junk_noise") {
        s.junk_noise = as_real(key, value);
      } else if (key == "seed") {
        s.seed = detail::parse_number<std::uint64_t>(key, value);
      } else {
        throw Error(ErrorCode::kSpecError, "unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kSpecError) throw;
      throw Error(ErrorCode::kSpecError, e.what());
    }
  }
  validate_synth_spec(s);
  return s;
}

/// Writes model{n}.pgmv, utts.ids and truth.tsv under prefix (a directory
/// path ending in '/' or a filename stem).
inline std::vector<std::filesystem::path> write_world(const SynthWorld& world,
                                                      const std::string& prefix) {
  const std::filesystem::path base(prefix);
  if (!prefix.empty() && (prefix.back() == '/' || std::filesystem::is_directory(base))) {
    std::filesystem::create_directories(base);
  } else if (base.has_parent_path()) {
    std::filesystem::create_directories(base.parent_path());
  }
  auto join = [&](const std::string& leaf) {
    if (!prefix.empty() && (prefix.back() == '/' || std::filesystem::is_directory(base))) {
      return base / leaf;
    }
    return std::filesystem::path(prefix + leaf);
  };
  std::vector<std::filesystem::path> written;
  for (std::size_t n = 0; n < world.models.size(); ++n) {
    written.push_back(join("model" + std::to_string(n + 1) + ".pgmv"));
    write_embeddings(written.back(), world.models[n]);
  }
  written.push_back(join("utts.ids"));
  write_ids(written.back(), world.ids);
  written.push_back(join("truth.tsv"));
  PseudoLabels truth;
  truth.label = world.truth;
  write_labels(written.back(), world.ids, truth);
  return written;
}

}  // namespace pgmvg

#endif  // PGMVG_SYNTH_HPP
