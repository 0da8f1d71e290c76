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

#ifndef PGMVG_PROGRESSIVE_HPP
#define PGMVG_PROGRESSIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgmvg/assess.hpp"
#include "pgmvg/core_types.hpp"
#include "pgmvg/graph.hpp"
#include "pgmvg/knn.hpp"
#include "pgmvg/preprocess.hpp"
#include "pgmvg/union_find.hpp"

namespace pgmvg {

struct IterationRecord {
  int k = 0;
  std::size_t nodes = 0;      // utterances in the graph at iteration end
  std::size_t new_nodes = 0;  // utterances that entered the graph
  std::size_t classes = 0;
  std::size_t merges = 0;
  std::size_t rejected_edges = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Graph, labels and history of a clustering run. While an iteration is in
/// progress labels may be sparse; they are densified when it completes.
struct IterationState {
  int k_current = 0;
  SpeakerGraph graph;
  PseudoLabels labels;
  std::vector<IterationRecord> history;
};

enum class EdgeKind { kInIn, kOutOut, kInOut };

struct EdgeCase {
  EdgeKind kind = EdgeKind::kOutOut;
  Edge edge;
};

inline EdgeCase classify_edge(const Edge& e, const SpeakerGraph& g) {
  const bool a_in = g.in_graph(e.a);
  const bool b_in = g.in_graph(e.b);
  if (a_in && b_in) return {EdgeKind::kInIn, e};
  if (!a_in && !b_in) return {EdgeKind::kOutOut, e};
  return {EdgeKind::kInOut, e};
}

/// One row of the optional assessment dump.
struct FitRecord {
  int k = 0;
  int class_a = 0;
  int class_b = 0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  Assessment assessment;
};

/// Runs double-Gaussian assessments between classes of the current state and
/// caches verdicts per unordered class pair for the running iteration.
class ClassAssessor {
 public:
  using FitSink = std::function<void(const FitRecord&)>;

  ClassAssessor(std::span<const EmbeddingMatrix> models, const ValidatedConfig& config,
                std::size_t threads = 1, FitSink sink = {})
      : models_(models), config_(config), threads_(threads), sink_(std::move(sink)) {}

  const ValidatedConfig& config() const noexcept { return config_; }

  Verdict judge(const IterationState& s, int la, int lb) {
    const auto key = std::minmax(la, lb);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::vector<std::vector<Index>> subclasses(2);
    for (std::size_t i = 0; i < s.labels.label.size(); ++i) {
      const int l = s.labels.label[i];
      if (l == key.first) subclasses[0].push_back(static_cast<Index>(i));
      if (l == key.second) subclasses[1].push_back(static_cast<Index>(i));
    }
    Assessment a = assess_subclasses(subclasses, models_, config_, threads_);
    if (sink_) {
      sink_({s.k_current, key.first, key.second, subclasses[0].size(),
             subclasses[1].size(), a});
    }
    cache_.emplace(key, a.decision.verdict);
    return a.decision.verdict;
  }

  /// Drops cached verdicts that involve a class whose membership changed.
  void invalidate(int label) {
    std::erase_if(cache_, [label](const auto& kv) {
      return kv.first.first == label || kv.first.second == label;
    });
  }

  void reset() { cache_.clear(); }

 private:
  std::span<const EmbeddingMatrix> models_;
  ValidatedConfig config_;
  std::size_t threads_;
  FitSink sink_;
  std::map<std::pair<int, int>, Verdict> cache_;
};

namespace detail {

// Folds class `from` into class `into`.
inline void merge_classes(IterationState& s, ClassAssessor& assessor, int into,
                          int from) {
  if (into == from) return;
  for (int& l : s.labels.label) {
    if (l == from) l = into;
  }
  assessor.invalidate(into);
  assessor.invalidate(from);
  ++s.history.back().merges;
}

inline int next_free_label(const IterationState& s) {
  int top = -1;
  for (int l : s.labels.label) top = std::max(top, l);
  return top + 1;
}

}  // namespace detail

/// New edge between two utterances already in the graph. Same class: keep.
/// Different classes: keep and merge on a MERGE verdict, otherwise reject.
inline void process_case_in_in(const Edge& e, IterationState& s,
                               ClassAssessor& assessor) {
  const int la = s.labels.label[e.a];
  const int lb = s.labels.label[e.b];
  if (la == lb) {
    s.graph.add_edge(e);
    return;
  }
  if (assessor.judge(s, la, lb) == Verdict::kMerge) {
    detail::merge_classes(s, assessor, std::min(la, lb), std::max(la, lb));
    s.graph.add_edge(e);
  } else {
    ++s.history.back().rejected_edges;
  }
}

/// Edges among utterances outside the graph. Their connected components that
/// reach min_size become new classes; the rest stay outside. Returns the
/// number of utterances that entered the graph.
inline std::size_t process_case_out_out(std::span<const Edge> edges, IterationState& s,
                                        std::size_t min_size) {
  const std::size_t n = s.graph.num_nodes();
  UnionFind sets(n);
  std::vector<bool> touched(n, false);
  for (const Edge& e : edges) {
    sets.unite(e.a, e.b);
    touched[e.a] = touched[e.b] = true;
  }
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (touched[i]) ++size[sets.find(i)];
  }
  std::vector<int> root_label(n, -1);
  int next = detail::next_free_label(s);
  std::size_t added = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    const std::size_t r = sets.find(i);
    if (size[r] < min_size) continue;
    if (root_label[r] < 0) root_label[r] = next++;
    s.labels.label[i] = root_label[r];
    ++added;
  }
  for (const Edge& e : edges) {
    if (root_label[sets.find(e.a)] >= 0) s.graph.add_edge(e);
  }
  return added;
}

/// All edges joining one outside utterance to utterances in the graph. A
/// single touched class adopts the utterance. Several touched classes are
/// assessed pairwise; the utterance joins only if the closure of MERGE
/// verdicts unites every touched class, otherwise it stays outside and its
/// edges are dropped. Returns true when the utterance joined.
inline bool process_case_in_out(Index out_node, std::span<const Edge> edges,
                                IterationState& s, ClassAssessor& assessor) {
  if (edges.empty()) return false;
  std::vector<int> touched;
  for (const Edge& e : edges) {
    const Index other = e.a == out_node ? e.b : e.a;
    touched.push_back(s.labels.label[other]);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  if (touched.size() > 1) {
    UnionFind closure(touched.size());
    for (std::size_t i = 0; i < touched.size(); ++i) {
      for (std::size_t j = i + 1; j < touched.size(); ++j) {
        if (assessor.judge(s, touched[i], touched[j]) == Verdict::kMerge) {
          closure.unite(i, j);
        }
      }
    }
    const std::size_t root = closure.find(0);
    for (std::size_t i = 1; i < touched.size(); ++i) {
      if (closure.find(i) != root) {
        s.history.back().rejected_edges += edges.size();
        return false;
      }
    }
    for (std::size_t i = 1; i < touched.size(); ++i) {
      detail::merge_classes(s, assessor, touched[0], touched[i]);
    }
  }
  s.labels.label[out_node] = touched[0];
  for (const Edge& e : edges) s.graph.add_edge(e);
  return true;
}

/// True when the last iteration added fewer than stop_new_node_frac of the
/// active utterances and the class count moved by less than
/// stop_cluster_delta_frac, or when k has reached k_max. Needs the initial
/// labeling plus at least two progressive iterations for the first test.
inline bool should_stop(std::span<const IterationRecord> history,
                        std::size_t active_count, const RunConfig& config) {
  if (history.empty()) return false;
  const IterationRecord& last = history.back();
  if (last.k >= config.k_max) return true;
  if (history.size() < 3) return false;
  const IterationRecord& prev = history[history.size() - 2];
  const bool few_new = static_cast<double>(last.new_nodes) <
                       config.stop_new_node_frac * static_cast<double>(active_count);
  const double delta =
      std::abs(static_cast<double>(last.classes) - static_cast<double>(prev.classes)) /
      std::max<double>(static_cast<double>(last.classes), 1.0);
  return few_new && delta < config.stop_cluster_delta_frac;
}

namespace detail {

// Removes classes smaller than min_size from the graph, then renumbers.
inline void finish_iteration(IterationState& s, std::size_t min_size) {
  std::map<int, std::size_t> sizes;
  for (int l : s.labels.label) {
    if (l >= 0) ++sizes[l];
  }
  std::vector<Index> dropped;
  for (std::size_t i = 0; i < s.labels.label.size(); ++i) {
    int& l = s.labels.label[i];
    if (l >= 0 && sizes[l] < min_size) {
      dropped.push_back(static_cast<Index>(i));
      l = -1;
    }
  }
  s.graph.remove_nodes(dropped);
  s.labels = densify(s.labels.label);
  IterationRecord& rec = s.history.back();
  rec.nodes = s.graph.in_graph_count();
  rec.classes = static_cast<std::size_t>(s.labels.num_classes);
}

}  // namespace detail

/// Labels the graph built from the MIPS edges at k: connected components
/// with at least min_cluster_size utterances become classes.
inline IterationState initial_state(const EdgeList& edges_at_k, std::size_t num_nodes,
                                    int k, const RunConfig& config) {
  SpeakerGraph g(num_nodes);
  for (const Edge& e : edges_at_k) g.add_edge(e);
  auto [labels, pruned] =
      assign_initial_labels(g, static_cast<std::size_t>(config.min_cluster_size));
  IterationState s;
  s.k_current = k;
  s.graph = std::move(pruned);
  s.labels = std::move(labels);
  IterationRecord rec;
  rec.k = k;
  rec.nodes = s.graph.in_graph_count();
  rec.new_nodes = rec.nodes;
  rec.classes = static_cast<std::size_t>(s.labels.num_classes);
  s.history.push_back(rec);
  return s;
}

/// One progressive step from the previous k to k. edges_prev and edges_now
/// are the aggregated MIPS edge lists at the two depths; `active` marks
/// utterances that survived filtering.
inline void progressive_iteration(IterationState& s, int k, const EdgeList& edges_prev,
                                  const EdgeList& edges_now,
                                  const std::vector<bool>& active,
                                  ClassAssessor& assessor) {
  const RunConfig& config = assessor.config().get();
  const auto min_size = static_cast<std::size_t>(config.min_cluster_size);
  const std::size_t n = s.graph.num_nodes();
  s.k_current = k;
  IterationRecord rec;
  rec.k = k;
  s.history.push_back(rec);
  assessor.reset();

  EdgeList fresh;
  std::set_difference(edges_now.begin(), edges_now.end(), edges_prev.begin(),
                      edges_prev.end(), std::back_inserter(fresh));

  // Stage 1: new edges between utterances already in the graph.
  const std::vector<bool> in_at_start = s.graph.membership();
  for (const Edge& e : fresh) {
    if (classify_edge(e, s.graph).kind == EdgeKind::kInIn) {
      process_case_in_in(e, s, assessor);
    }
  }

  // Stage 2: components among utterances outside the graph.
  EdgeList out_out;
  for (const Edge& e : edges_now) {
    if (active[e.a] && active[e.b] &&
        classify_edge(e, s.graph).kind == EdgeKind::kOutOut) {
      out_out.push_back(e);
    }
  }
  s.history.back().new_nodes += process_case_out_out(out_out, s, min_size);

  // Edges from classes born in stage 2 to older classes are now in-in.
  for (const Edge& e : edges_now) {
    if (!s.graph.in_graph(e.a) || !s.graph.in_graph(e.b)) continue;
    if (in_at_start[e.a] == in_at_start[e.b]) continue;
    process_case_in_in(e, s, assessor);
  }

  // Stage 3: attach outside utterances to the classes they touch.
  const std::vector<bool> in_before_attach = s.graph.membership();
  std::vector<EdgeList> in_out(n);
  for (const Edge& e : edges_now) {
    if (in_before_attach[e.a] == in_before_attach[e.b]) continue;
    const Index out_node = in_before_attach[e.a] ? e.b : e.a;
    if (active[out_node]) in_out[out_node].push_back(e);
  }
  std::vector<bool> attached(n, false);
  for (std::size_t b = 0; b < n; ++b) {
    if (in_out[b].empty()) continue;
    if (process_case_in_out(static_cast<Index>(b), in_out[b], s, assessor)) {
      attached[b] = true;
      ++s.history.back().new_nodes;
    }
  }
  for (const Edge& e : edges_now) {
    if (attached[e.a] && attached[e.b] &&
        s.labels.label[e.a] == s.labels.label[e.b]) {
      s.graph.add_edge(e);
    }
  }

  detail::finish_iteration(s, min_size);
}

struct RunOptions {
  std::size_t threads = 1;
  bool skip_adaptation = false;
  std::function<void(int k, const SpeakerGraph&)> graph_sink;
  ClassAssessor::FitSink fit_sink;
};

struct RunResult {
  PseudoLabels labels;
  IterationState state;
  RemovalReport removal;
  std::vector<bool> active;
};

/// Prepares the per-model embeddings used for similarity search:
/// unit-normalized and, unless skipped, center-aligned.
inline std::vector<EmbeddingMatrix> prepare_models(std::span<const EmbeddingMatrix> models,
                                                   bool skip_adaptation) {
  std::vector<EmbeddingMatrix> out;
  out.reserve(models.size());
  for (const EmbeddingMatrix& m : models) {
    EmbeddingMatrix unit = normalize_rows(m);
    out.push_back(skip_adaptation ? std::move(unit) : statistic_adapt(unit));
  }
  return out;
}

/// Full pipeline: adaptation, outlier removal, neighbor tables, initial
/// labeling at k_init and progressive growth of k until should_stop.
inline RunResult run_pgmvg(std::span<const EmbeddingMatrix> models,
                           const UtteranceSet& ids, const ValidatedConfig& vconfig,
                           const RunOptions& opts = {}) {
  const RunConfig& config = vconfig.get();
  if (models.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "at least one embedding model is required");
  }
  const std::size_t rows = models[0].rows();
  for (const EmbeddingMatrix& m : models) {
    if (m.rows() != rows) {
      throw Error(ErrorCode::kShapeMismatch,
                  "models disagree on utterance count: " + std::to_string(rows) +
                      " vs " + std::to_string(m.rows()));
    }
  }
  if (ids.size() != rows) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(ids.size()) + " ids for " +
                                               std::to_string(rows) + " rows");
  }
  auto stage_error = [](const char* stage, int k, const Error& e) {
    return Error(e.code(), std::string(stage) + " (k=" + std::to_string(k) +
                               "): " + e.what());
  };

  RunResult result;
  const std::vector<EmbeddingMatrix> prepared = prepare_models(models, opts.skip_adaptation);
  const KnnOptions knn{opts.threads};

  std::vector<bool> active = ids.active.empty() ? std::vector<bool>(rows, true) : ids.active;
  std::vector<NeighborTable> tables;
  try {
    std::vector<NeighborTable> scan;
    for (const EmbeddingMatrix& m : prepared) {
      scan.push_back(
          build_neighbor_table(m, active, static_cast<std::size_t>(config.outlier_rank), knn));
    }
    result.removal = find_high_degree_outliers(
        scan, static_cast<std::size_t>(config.outlier_rank), config.outlier_threshold);
  } catch (const Error& e) {
    throw stage_error("outlier scan", 0, e);
  }
  for (Index i : result.removal.removed) active[i] = false;
  const std::size_t active_count =
      static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  if (active_count < 2) {
    throw Error(ErrorCode::kEmptyAfterFilter,
                std::to_string(active_count) + " utterances left after outlier removal");
  }
  for (const EmbeddingMatrix& m : prepared) {
    tables.push_back(
        build_neighbor_table(m, active, static_cast<std::size_t>(config.k_max), knn));
  }
  const int depth = static_cast<int>(tables[0].k_computed());

  int k = std::min(config.k_init, depth);
  EdgeList edges = union_edges(build_all_mips(tables, static_cast<std::size_t>(k), opts.threads));
  IterationState state = initial_state(edges, rows, k, config);
  if (opts.graph_sink) opts.graph_sink(k, state.graph);

  ClassAssessor assessor(prepared, vconfig, opts.threads, opts.fit_sink);
  while (!should_stop(state.history, active_count, config) &&
         k + config.k_step <= depth) {
    k += config.k_step;
    EdgeList next =
        union_edges(build_all_mips(tables, static_cast<std::size_t>(k), opts.threads));
    try {
      progressive_iteration(state, k, edges, next, active, assessor);
    } catch (const Error& e) {
      throw stage_error("progressive iteration", k, e);
    }
    edges = std::move(next);
    if (opts.graph_sink) opts.graph_sink(k, state.graph);
  }

  result.labels = state.labels;
  result.state = std::move(state);
  result.active = std::move(active);
  return result;
}

}  // namespace pgmvg

#endif  // PGMVG_PROGRESSIVE_HPP
