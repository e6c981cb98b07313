#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "bunmeso/graph.hpp"

namespace bunmeso {

struct DegreeTable {
  std::vector<std::uint32_t> in;
  std::vector<std::uint32_t> out;
  std::vector<std::uint32_t> total;
};

inline DegreeTable degrees(const Digraph& g) {
  DegreeTable t;
  const std::size_t n = g.node_count();
  t.in.resize(n);
  t.out.resize(n);
  t.total.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    t.out[v] = static_cast<std::uint32_t>(g.out_degree(v));
    t.in[v] = static_cast<std::uint32_t>(g.in_degree(v));
    t.total[v] = t.in[v] + t.out[v];
  }
  return t;
}

namespace detail {

// Sorts each class, then orders classes by smallest member.
inline void canonicalize(std::vector<std::vector<NodeId>>& classes) {
  for (auto& c : classes) std::sort(c.begin(), c.end());
  std::sort(classes.begin(), classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

inline std::vector<std::vector<NodeId>> group_by_label(const std::vector<std::uint32_t>& label,
                                                       std::size_t count) {
  std::vector<std::vector<NodeId>> classes(count);
  for (NodeId v = 0; v < label.size(); ++v) classes[label[v]].push_back(v);
  canonicalize(classes);
  return classes;
}

}  // namespace detail

// Tarjan's algorithm with an explicit stack. Classes are sorted internally and
// ordered by smallest member.
inline std::vector<std::vector<NodeId>> strongly_connected_components(const Digraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  std::vector<std::uint32_t> comp(n, 0);
  std::uint32_t next_index = 0;
  std::uint32_t n_comp = 0;

  struct Frame {
    NodeId v;
    std::size_t child;
  };
  std::vector<Frame> call;
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto nbrs = g.out_neighbors(f.v);
      if (f.child < nbrs.size()) {
        const NodeId w = nbrs[f.child++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const NodeId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = n_comp;
        } while (w != v);
        ++n_comp;
      }
    }
  }
  return detail::group_by_label(comp, n_comp);
}

inline std::vector<std::vector<NodeId>> weakly_connected_components(const Digraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> comp(n, UINT32_MAX);
  std::uint32_t n_comp = 0;
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    comp[s] = n_comp;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      for (auto nbrs : {g.out_neighbors(v), g.in_neighbors(v)})
        for (NodeId w : nbrs)
          if (comp[w] == UINT32_MAX) {
            comp[w] = n_comp;
            queue.push_back(w);
          }
    }
    ++n_comp;
  }
  return detail::group_by_label(comp, n_comp);
}

// Index of the largest class; ties go to the class with the smallest member,
// which is the earliest one in canonical order.
inline std::size_t largest_class(const std::vector<std::vector<NodeId>>& classes) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (classes[i].size() > classes[best].size()) best = i;
  return best;
}

struct ComponentCensus {
  std::vector<std::size_t> wcc_sizes;  // descending
  std::vector<std::size_t> scc_sizes;  // descending
  std::size_t n_wcc = 0;
  std::size_t n_scc = 0;
  std::optional<double> lcc_ratio_weak;    // largest / second largest
  std::optional<double> lcc_ratio_strong;
  double frac_largest_wcc = 0.0;
  double frac_largest_scc = 0.0;
};

inline ComponentCensus component_census(const Digraph& g) {
  auto sizes = [](const std::vector<std::vector<NodeId>>& classes) {
    std::vector<std::size_t> s;
    for (const auto& c : classes) s.push_back(c.size());
    std::sort(s.rbegin(), s.rend());
    return s;
  };
  ComponentCensus c;
  c.wcc_sizes = sizes(weakly_connected_components(g));
  c.scc_sizes = sizes(strongly_connected_components(g));
  c.n_wcc = c.wcc_sizes.size();
  c.n_scc = c.scc_sizes.size();
  const double n = static_cast<double>(g.node_count());
  if (c.n_wcc >= 2) c.lcc_ratio_weak = double(c.wcc_sizes[0]) / double(c.wcc_sizes[1]);
  if (c.n_scc >= 2) c.lcc_ratio_strong = double(c.scc_sizes[0]) / double(c.scc_sizes[1]);
  if (n > 0) {
    c.frac_largest_wcc = double(c.wcc_sizes[0]) / n;
    c.frac_largest_scc = double(c.scc_sizes[0]) / n;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Bow-tie decomposition relative to the largest SCC.

enum class BowTieClass : std::uint8_t { scc, in, out, tubes, in_tendrils, out_tendrils, others };

inline constexpr std::array<BowTieClass, 7> kBowTieClasses = {
    BowTieClass::scc,         BowTieClass::in,           BowTieClass::out,   BowTieClass::tubes,
    BowTieClass::in_tendrils, BowTieClass::out_tendrils, BowTieClass::others};

inline constexpr std::string_view to_string(BowTieClass c) {
  constexpr std::array<std::string_view, 7> names = {"SCC",         "IN",           "OUT",   "TUBES",
                                                     "IN_TENDRILS", "OUT_TENDRILS", "OTHERS"};
  return names[static_cast<std::size_t>(c)];
}

struct BowTiePartition {
  std::vector<BowTieClass> label;  // per node
  std::array<std::size_t, 7> counts{};

  std::size_t count(BowTieClass c) const { return counts[static_cast<std::size_t>(c)]; }
  double fraction(BowTieClass c) const {
    return label.empty() ? 0.0 : double(count(c)) / double(label.size());
  }
  std::vector<NodeId> members(BowTieClass c) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < label.size(); ++v)
      if (label[v] == c) out.push_back(v);
    return out;
  }
};

namespace detail {

// Multi-source BFS marking everything reachable from `sources` (sources included).
inline std::vector<char> reach(const Digraph& g, const std::vector<NodeId>& sources, bool forward) {
  std::vector<char> mark(g.node_count(), 0);
  std::vector<NodeId> queue;
  for (NodeId s : sources)
    if (!mark[s]) {
      mark[s] = 1;
      queue.push_back(s);
    }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId w : forward ? g.out_neighbors(v) : g.in_neighbors(v))
      if (!mark[w]) {
        mark[w] = 1;
        queue.push_back(w);
      }
  }
  return mark;
}

}  // namespace detail

inline BowTiePartition bowtie_decompose(const Digraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) throw EmptyGraphError();
  const auto sccs = strongly_connected_components(g);
  const auto& core = sccs[largest_class(sccs)];

  const auto from_core = detail::reach(g, core, true);
  const auto to_core = detail::reach(g, core, false);

  BowTiePartition bt;
  bt.label.assign(n, BowTieClass::others);
  std::vector<char> in_core(n, 0);
  for (NodeId v : core) in_core[v] = 1;
  std::vector<NodeId> in_set;
  std::vector<NodeId> out_set;
  for (NodeId v = 0; v < n; ++v) {
    if (in_core[v]) {
      bt.label[v] = BowTieClass::scc;
    } else if (to_core[v]) {
      bt.label[v] = BowTieClass::in;
      in_set.push_back(v);
    } else if (from_core[v]) {
      bt.label[v] = BowTieClass::out;
      out_set.push_back(v);
    }
  }
  const auto from_in = detail::reach(g, in_set, true);
  const auto to_out = detail::reach(g, out_set, false);
  for (NodeId v = 0; v < n; ++v) {
    if (bt.label[v] != BowTieClass::others) continue;
    if (from_in[v] && to_out[v]) {
      bt.label[v] = BowTieClass::tubes;
    } else if (from_in[v]) {
      bt.label[v] = BowTieClass::in_tendrils;
    } else if (to_out[v]) {
      bt.label[v] = BowTieClass::out_tendrils;
    }
  }
  for (BowTieClass c : bt.label) ++bt.counts[static_cast<std::size_t>(c)];
  return bt;
}

}  // namespace bunmeso
