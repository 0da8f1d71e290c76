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

#ifndef PGMVG_ASSESS_HPP
#define PGMVG_ASSESS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgmvg/core_types.hpp"
#include "pgmvg/parallel.hpp"

namespace pgmvg {

// Double-Gaussian assessment.
//
// Two candidate sub-classes are compared by pooling the cosine scores of all
// utterance pairs inside their union. Same-speaker unions give a unimodal
// score distribution, different-speaker unions a bimodal one (high intra
// scores, low cross scores). A two-component 1-D mixture is fitted by EM and
// the ordered rules in decide_merge turn the fit into a verdict. Each model
// votes independently; a strict majority of MERGE votes is required.

/// Two-component 1-D Gaussian mixture; component 1 has the larger mean.
struct GaussianPairFit {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double w1 = 0.5;
  double w2 = 0.5;
  double log_likelihood = 0.0;
  int iterations = 0;

  friend bool operator==(const GaussianPairFit&, const GaussianPairFit&) = default;
};

struct EmOptions {
  double sigma_floor = 1e-4;
  int max_iters = 200;
  double tol = 1e-6;
};

namespace detail {

struct MixtureParams {
  std::array<double, 2> mu{};
  std::array<double, 2> sigma{};
  std::array<double, 2> weight{};
};

inline double log_normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma) - 0.5 * z * z;
}

// Fills resp with the responsibility of component 0 and returns the data
// log-likelihood under p.
inline double expectation(std::span<const double> x, const MixtureParams& p,
                          std::vector<double>& resp) {
  const double log_w0 = std::log(p.weight[0]);
  const double log_w1 = std::log(p.weight[1]);
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = log_w0 + log_normal_pdf(x[i], p.mu[0], p.sigma[0]);
    const double b = log_w1 + log_normal_pdf(x[i], p.mu[1], p.sigma[1]);
    const double hi = std::max(a, b);
    const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    resp[i] = std::exp(a - lse);
    ll += lse;
  }
  return ll;
}

inline MixtureParams maximization(std::span<const double> x,
                                  const std::vector<double>& resp,
                                  const MixtureParams& prev, double floor) {
  MixtureParams p = prev;
  const double n = static_cast<double>(x.size());
  for (int c = 0; c < 2; ++c) {
    double nk = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = c == 0 ? resp[i] : 1.0 - resp[i];
      nk += r;
      sum += r * x[i];
    }
    p.weight[c] = nk / n;
    // An empty component keeps its previous location and spread.
    if (nk < 1e-12) continue;
    p.mu[c] = sum / nk;
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = c == 0 ? resp[i] : 1.0 - resp[i];
      const double d = x[i] - p.mu[c];
      var += r * d * d;
    }
    p.sigma[c] = std::max(std::sqrt(var / nk), floor);
  }
  return p;
}

inline std::pair<double, double> mean_sd(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace detail

/// Fits a two-component mixture by EM.
///
/// Scores are sorted first and split at the median; the upper half seeds
/// component 1 and the lower half component 2, so the result depends only on
/// the multiset of scores. Iteration stops when the relative log-likelihood
/// gain drops below tol or after max_iters M-steps. Sigmas never go below
/// sigma_floor. When ll_trace is given it receives the log-likelihood of the
/// initial and of every subsequent parameter set.
inline GaussianPairFit fit_double_gaussian(std::span<const double> scores,
                                           const EmOptions& opts = {},
                                           std::vector<double>* ll_trace = nullptr) {
  if (scores.size() < 4) {
    throw Error(ErrorCode::kTooFewScores,
                std::to_string(scores.size()) + " scores, need at least 4");
  }
  std::vector<double> x(scores.begin(), scores.end());
  std::sort(x.begin(), x.end());
  const std::size_t half = x.size() / 2;
  const std::span<const double> all(x);

  detail::MixtureParams p;
  const auto [hi_mean, hi_sd] = detail::mean_sd(all.subspan(half));
  const auto [lo_mean, lo_sd] = detail::mean_sd(all.first(half));
  p.mu = {hi_mean, lo_mean};
  p.sigma = {std::max(hi_sd, opts.sigma_floor), std::max(lo_sd, opts.sigma_floor)};
  p.weight = {static_cast<double>(x.size() - half) / static_cast<double>(x.size()),
              static_cast<double>(half) / static_cast<double>(x.size())};

  std::vector<double> resp(x.size());
  double ll = detail::expectation(all, p, resp);
  if (ll_trace) ll_trace->assign(1, ll);
  int iters = 0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const detail::MixtureParams next =
        detail::maximization(all, resp, p, opts.sigma_floor);
    const double next_ll = detail::expectation(all, next, resp);
    if (ll_trace) ll_trace->push_back(next_ll);
    const double gain = (next_ll - ll) / std::max(std::abs(ll), 1.0);
    p = next;
    ll = next_ll;
    iters = it;
    if (gain < opts.tol) break;
  }

  const int top = p.mu[0] >= p.mu[1] ? 0 : 1;
  const int bottom = 1 - top;
  GaussianPairFit fit;
  fit.mu1 = p.mu[top];
  fit.mu2 = p.mu[bottom];
  fit.sigma1 = p.sigma[top];
  fit.sigma2 = p.sigma[bottom];
  fit.w1 = p.weight[top];
  fit.w2 = 1.0 - fit.w1;
  fit.log_likelihood = ll;
  fit.iterations = iters;
  return fit;
}

enum class Verdict { kMerge, kNoMerge };

enum class MergeCase { kCase1 = 1, kCase2 = 2, kCase3 = 3, kCase4 = 4 };

inline std::string_view verdict_name(Verdict v) {
  return v == Verdict::kMerge ? "MERGE" : "NO_MERGE";
}

inline std::string_view case_name(MergeCase c) {
  switch (c) {
    case MergeCase::kCase1: return "CASE1";
    case MergeCase::kCase2: return "CASE2";
    case MergeCase::kCase3: return "CASE3";
    case MergeCase::kCase4: return "CASE4";
  }
  return "?";
}

struct MergeDecision {
  Verdict verdict = Verdict::kNoMerge;
  MergeCase case_tag = MergeCase::kCase4;
  GaussianPairFit fit;
};

struct MergeThresholds {
  double th_high = 0.4;
  double th_low = 0.2;
  double epsilon = 0.05;
};

/// Applies the four merge rules in order; the first one that holds wins.
///   1. mu2 > th_high                                   -> merge
///   2. w1 > 0.5                                        -> merge
///   3. mu1 - sigma1 < mu2 + sigma2 + epsilon, mu1 > th_low -> merge
///   4. otherwise                                       -> keep apart
inline MergeDecision decide_merge(const GaussianPairFit& fit,
                                  const MergeThresholds& th) {
  MergeDecision d;
  d.fit = fit;
  if (fit.mu2 > th.th_high) {
    d.case_tag = MergeCase::kCase1;
  } else if (fit.w1 > 0.5) {
    d.case_tag = MergeCase::kCase2;
  } else if (fit.mu1 - fit.sigma1 < fit.mu2 + fit.sigma2 + th.epsilon &&
             fit.mu1 > th.th_low) {
    d.case_tag = MergeCase::kCase3;
  } else {
    d.case_tag = MergeCase::kCase4;
  }
  d.verdict = d.case_tag == MergeCase::kCase4 ? Verdict::kNoMerge : Verdict::kMerge;
  return d;
}

/// Cosine scores of every unordered pair in the union of the sub-classes,
/// enumerated over the sorted union.
inline std::vector<double> collect_scores(
    std::span<const std::vector<Index>> subclasses, const EmbeddingMatrix& m) {
  std::vector<Index> members;
  for (const auto& s : subclasses) members.insert(members.end(), s.begin(), s.end());
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw Error(ErrorCode::kShapeMismatch, "sub-classes overlap");
  }
  if (members.size() < 2) {
    throw Error(ErrorCode::kTooFewUtterances,
                std::to_string(members.size()) + " utterances in union");
  }
  std::vector<double> scores;
  scores.reserve(members.size() * (members.size() - 1) / 2);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto ri = m.row(members[i]);
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      scores.push_back(dot(ri, m.row(members[j])));
    }
  }
  return scores;
}

struct Assessment {
  MergeDecision decision;                // combined verdict
  std::vector<MergeDecision> per_model;  // in model order
};

inline MergeThresholds thresholds_of(const RunConfig& c) {
  return {c.th_high, c.th_low, c.epsilon};
}

inline EmOptions em_options_of(const RunConfig& c) {
  return {c.sigma_floor, c.em_max_iters, c.em_tol};
}

/// Majority vote over per-model decisions. An even split keeps classes
/// apart. The reported case is the most frequent one among the winning
/// side (lowest case number on ties); its fit comes from the first model
/// that voted that case.
inline MergeDecision combine_votes(std::span<const MergeDecision> votes) {
  std::size_t merges = 0;
  for (const auto& v : votes) merges += v.verdict == Verdict::kMerge;
  const Verdict winner =
      2 * merges > votes.size() ? Verdict::kMerge : Verdict::kNoMerge;
  std::array<std::size_t, 5> counts{};
  for (const auto& v : votes) {
    if (v.verdict == winner) ++counts[static_cast<int>(v.case_tag)];
  }
  int best = winner == Verdict::kMerge ? 1 : 4;
  for (int c = 1; c <= 4; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  MergeDecision out;
  out.verdict = winner;
  out.case_tag = static_cast<MergeCase>(best);
  for (const auto& v : votes) {
    if (v.verdict == winner && v.case_tag == out.case_tag) {
      out.fit = v.fit;
      break;
    }
  }
  return out;
}

/// Fits and decides per model, then combines the N decisions by majority.
inline Assessment assess_subclasses(std::span<const std::vector<Index>> subclasses,
                                    std::span<const EmbeddingMatrix> models,
                                    const ValidatedConfig& config,
                                    std::size_t threads = 1) {
  if (models.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "assessment needs at least one model");
  }
  Assessment a;
  a.per_model.resize(models.size());
  const EmOptions em = em_options_of(config.get());
  const MergeThresholds th = thresholds_of(config.get());
  parallel_for(models.size(), threads, [&](std::size_t n) {
    const std::vector<double> scores = collect_scores(subclasses, models[n]);
    a.per_model[n] = decide_merge(fit_double_gaussian(scores, em), th);
  });
  a.decision = combine_votes(a.per_model);
  return a;
}

}  // namespace pgmvg

#endif  // PGMVG_ASSESS_HPP
