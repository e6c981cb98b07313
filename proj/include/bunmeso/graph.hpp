#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bunmeso/error.hpp"

namespace bunmeso {

using NodeId = std::uint32_t;

struct Edge {
  NodeId from = 0;
  NodeId to = 0;

  auto operator<=>(const Edge&) const = default;
};

// Immutable simple digraph on nodes 0..n-1: no self-loops, no parallel edges.
// Edges are kept sorted by (from, to); out- and in-adjacency are CSR arrays.
class Digraph {
 public:
  Digraph() = default;

  // Self-loops and duplicates in `edges` are dropped.
  Digraph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    for (const Edge& e : edges)
      if (e.from >= n || e.to >= n)
        throw ParameterError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                             ") has an endpoint outside [0," + std::to_string(n) + ")");
    std::erase_if(edges, [](const Edge& e) { return e.from == e.to; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    out_offsets_.assign(n_ + 1, 0);
    in_offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++out_offsets_[e.from + 1];
      ++in_offsets_[e.to + 1];
    }
    for (std::size_t v = 0; v < n_; ++v) {
      out_offsets_[v + 1] += out_offsets_[v];
      in_offsets_[v + 1] += in_offsets_[v];
    }
    out_adj_.resize(edges_.size());
    in_adj_.resize(edges_.size());
    std::vector<std::size_t> fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      out_adj_[i] = edges_[i].to;
      in_adj_[fill[edges_[i].to]++] = edges_[i].from;
    }
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const NodeId> out_neighbors(NodeId v) const {
    return {out_adj_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_adj_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }
  std::size_t out_degree(NodeId v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  bool has_edge(NodeId from, NodeId to) const {
    const auto row = out_neighbors(from);
    return std::binary_search(row.begin(), row.end(), to);
  }

  bool operator==(const Digraph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeId> out_adj_;
  std::vector<NodeId> in_adj_;
};

// Simple undirected graph; adjacency rows are sorted.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::vector<std::vector<NodeId>> adjacency)
      : adj_(std::move(adjacency)) {
    for (auto& row : adj_) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      m2_ += row.size();
    }
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return m2_ / 2; }
  std::span<const NodeId> neighbors(NodeId v) const { return adj_[v]; }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::size_t m2_ = 0;
};

// Forgets direction; u-v present iff u->v or v->u.
inline UndirectedGraph undirected_projection(const Digraph& g) {
  std::vector<std::vector<NodeId>> adj(g.node_count());
  for (const Edge& e : g.edges()) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  return UndirectedGraph(std::move(adj));
}

// Subgraph induced by `nodes` (relabelled 0..k-1 in the given order).
inline Digraph induced_subgraph(const Digraph& g, std::span<const NodeId> nodes) {
  std::vector<std::int64_t> local(g.node_count(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::int64_t>(i);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (local[e.from] >= 0 && local[e.to] >= 0)
      edges.push_back({static_cast<NodeId>(local[e.from]), static_cast<NodeId>(local[e.to])});
  return Digraph(nodes.size(), std::move(edges));
}

// Undirected graph as a digraph with every edge present in both directions.
inline Digraph symmetric_digraph(std::size_t n, std::span<const Edge> undirected_edges) {
  std::vector<Edge> edges;
  edges.reserve(2 * undirected_edges.size());
  for (const Edge& e : undirected_edges) {
    edges.push_back(e);
    edges.push_back({e.to, e.from});
  }
  return Digraph(n, std::move(edges));
}

}  // namespace bunmeso
