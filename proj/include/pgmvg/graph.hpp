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

#ifndef PGMVG_GRAPH_HPP
#define PGMVG_GRAPH_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgmvg/core_types.hpp"
#include "pgmvg/knn.hpp"
#include "pgmvg/parallel.hpp"
#include "pgmvg/union_find.hpp"

namespace pgmvg {

/// Undirected edge, always stored with a < b.
struct Edge {
  Index a = 0;
  Index b = 0;

  static Edge make(Index x, Index y) {
    if (x == y) {
      throw Error(ErrorCode::kShapeMismatch,
                  "self edge on node " + std::to_string(x));
    }
    return x < y ? Edge{x, y} : Edge{y, x};
  }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Sorted, duplicate-free list of edges.
using EdgeList = std::vector<Edge>;

/// Speaker relationship graph: kept edges, membership in the graph (X_gin)
/// and a union-find mirror of the edge components.
class SpeakerGraph {
 public:
  SpeakerGraph() = default;
  explicit SpeakerGraph(std::size_t num_nodes)
      : in_graph_(num_nodes, false), sets_(num_nodes) {}

  std::size_t num_nodes() const noexcept { return in_graph_.size(); }
  const std::set<Edge>& edges() const noexcept { return edges_; }
  bool contains(const Edge& e) const { return edges_.count(e) != 0; }
  bool in_graph(Index i) const { return in_graph_[i]; }
  const std::vector<bool>& membership() const noexcept { return in_graph_; }

  std::size_t in_graph_count() const {
    return static_cast<std::size_t>(
        std::count(in_graph_.begin(), in_graph_.end(), true));
  }

  void add_edge(const Edge& e) {
    edges_.insert(e);
    in_graph_[e.a] = true;
    in_graph_[e.b] = true;
    sets_.unite(e.a, e.b);
  }

  /// Drops the nodes from the graph along with every incident edge.
  void remove_nodes(std::span<const Index> nodes) {
    if (nodes.empty()) return;
    std::vector<bool> drop(num_nodes(), false);
    for (Index i : nodes) {
      drop[i] = true;
      in_graph_[i] = false;
    }
    std::erase_if(edges_, [&](const Edge& e) { return drop[e.a] || drop[e.b]; });
    sets_ = UnionFind(num_nodes());
    for (const Edge& e : edges_) sets_.unite(e.a, e.b);
  }

  std::size_t component_root(Index i) const { return sets_.root(i); }

 private:
  std::set<Edge> edges_;
  std::vector<bool> in_graph_;
  UnionFind sets_;
};

/// IPS edges of one pivot: the pivot joined to each of its top-k neighbors.
inline EdgeList build_ips(const NeighborTable& t, Index pivot, std::size_t k) {
  EdgeList out;
  for (const Neighbor& n : topk_slice(t, pivot, k)) {
    out.push_back(Edge::make(pivot, n.index));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// MIPS edges of one pivot: edges present in the IPS of every model.
inline EdgeList build_mips(std::span<const NeighborTable> tables, Index pivot,
                           std::size_t k) {
  if (tables.empty()) return {};
  EdgeList kept = build_ips(tables[0], pivot, k);
  for (std::size_t n = 1; n < tables.size() && !kept.empty(); ++n) {
    const EdgeList other = build_ips(tables[n], pivot, k);
    EdgeList both;
    std::set_intersection(kept.begin(), kept.end(), other.begin(), other.end(),
                          std::back_inserter(both));
    kept = std::move(both);
  }
  return kept;
}

/// MIPS for every active pivot (inactive pivots get an empty list).
inline std::vector<EdgeList> build_all_mips(std::span<const NeighborTable> tables,
                                            std::size_t k,
                                            std::size_t threads = 1) {
  if (tables.empty()) return {};
  const std::size_t rows = tables[0].rows();
  std::vector<EdgeList> per_pivot(rows);
  parallel_for(rows, threads, [&](std::size_t p) {
    const auto pivot = static_cast<Index>(p);
    if (tables[0].is_active(pivot)) per_pivot[p] = build_mips(tables, pivot, k);
  });
  return per_pivot;
}

/// Union of all pivots' MIPS as a sorted edge list.
inline EdgeList union_edges(std::span<const EdgeList> mips_per_pivot) {
  EdgeList all;
  for (const EdgeList& l : mips_per_pivot) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

/// Speaker relationship graph holding every edge found in any pivot's MIPS.
inline SpeakerGraph aggregate(std::span<const EdgeList> mips_per_pivot,
                              std::size_t num_nodes) {
  SpeakerGraph g(num_nodes);
  for (const Edge& e : union_edges(mips_per_pivot)) g.add_edge(e);
  return g;
}

struct Components {
  std::vector<int> id;  // -1 for nodes outside the graph
  int count = 0;
};

/// Dense component ids, numbered by the smallest node index they contain.
inline Components connected_components(const SpeakerGraph& g) {
  Components c;
  c.id.assign(g.num_nodes(), -1);
  std::vector<int> root_id(g.num_nodes(), -1);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto node = static_cast<Index>(i);
    if (!g.in_graph(node)) continue;
    const std::size_t r = g.component_root(node);
    if (root_id[r] < 0) root_id[r] = c.count++;
    c.id[i] = root_id[r];
  }
  return c;
}

/// Labels every component with at least min_size nodes; everything else is
/// removed from the graph and left unlabeled.
inline std::pair<PseudoLabels, SpeakerGraph> assign_initial_labels(
    const SpeakerGraph& g, std::size_t min_size) {
  const Components comps = connected_components(g);
  std::vector<std::size_t> sizes(comps.count, 0);
  for (int id : comps.id) {
    if (id >= 0) ++sizes[id];
  }
  std::vector<int> raw(g.num_nodes(), -1);
  std::vector<Index> dropped;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const int id = comps.id[i];
    if (id < 0) continue;
    if (sizes[id] >= min_size) {
      raw[i] = id;
    } else {
      dropped.push_back(static_cast<Index>(i));
    }
  }
  SpeakerGraph pruned = g;
  pruned.remove_nodes(dropped);
  return {densify(raw), std::move(pruned)};
}

}  // namespace pgmvg

#endif  // PGMVG_GRAPH_HPP
