#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bunmeso/error.hpp"
#include "bunmeso/graph.hpp"
#include "bunmeso/graphcore.hpp"
#include "bunmeso/nullmodels.hpp"
#include "bunmeso/rng.hpp"

namespace bunmeso {

// ---------------------------------------------------------------------------
// Assortativity

namespace detail {

// Pearson correlation of integer pairs with exact integer moment sums.
inline std::optional<double> pearson(std::span<const std::int64_t> xs,
                                     std::span<const std::int64_t> ys) {
  using Wide = __int128;
  Wide n = static_cast<Wide>(xs.size());
  Wide sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += static_cast<Wide>(xs[i]) * xs[i];
    syy += static_cast<Wide>(ys[i]) * ys[i];
    sxy += static_cast<Wide>(xs[i]) * ys[i];
  }
  const Wide cov = n * sxy - sx * sy;
  const Wide vx = n * sxx - sx * sx;
  const Wide vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) return std::nullopt;
  const long double denom =
      std::sqrt(static_cast<long double>(vx)) * std::sqrt(static_cast<long double>(vy));
  return static_cast<double>(static_cast<long double>(cov) / denom);
}

}  // namespace detail

struct AssortativityReport {
  std::optional<double> r_und;   // undirected projection, excess degrees
  std::optional<double> out_in;  // source out-degree vs target in-degree
  std::optional<double> out_out;
  std::optional<double> in_in;
  std::optional<double> in_out;
};

enum class DegreeKind { out, in };

// Pearson correlation over directed edges of (alpha-degree of source,
// beta-degree of target).
inline std::optional<double> directed_assortativity(const Digraph& g, DegreeKind alpha,
                                                    DegreeKind beta) {
  std::vector<std::int64_t> xs;
  std::vector<std::int64_t> ys;
  xs.reserve(g.edge_count());
  ys.reserve(g.edge_count());
  auto deg = [&](NodeId v, DegreeKind k) {
    return static_cast<std::int64_t>(k == DegreeKind::out ? g.out_degree(v) : g.in_degree(v));
  };
  for (const Edge& e : g.edges()) {
    xs.push_back(deg(e.from, alpha));
    ys.push_back(deg(e.to, beta));
  }
  return detail::pearson(xs, ys);
}

// Newman's coefficient on the undirected projection: correlation of the
// excess degrees at the two ends of each edge, both orientations counted.
inline std::optional<double> undirected_assortativity(const UndirectedGraph& ug) {
  std::vector<std::int64_t> xs;
  std::vector<std::int64_t> ys;
  for (NodeId u = 0; u < ug.node_count(); ++u)
    for (NodeId w : ug.neighbors(u)) {
      xs.push_back(static_cast<std::int64_t>(ug.degree(u)) - 1);
      ys.push_back(static_cast<std::int64_t>(ug.degree(w)) - 1);
    }
  return detail::pearson(xs, ys);
}

inline AssortativityReport assortativity(const Digraph& g) {
  if (g.edge_count() < 2) throw ParameterError("assortativity needs at least two edges");
  AssortativityReport r;
  r.r_und = undirected_assortativity(undirected_projection(g));
  r.out_in = directed_assortativity(g, DegreeKind::out, DegreeKind::in);
  r.out_out = directed_assortativity(g, DegreeKind::out, DegreeKind::out);
  r.in_in = directed_assortativity(g, DegreeKind::in, DegreeKind::in);
  r.in_out = directed_assortativity(g, DegreeKind::in, DegreeKind::out);
  return r;
}

// ---------------------------------------------------------------------------
// Reciprocity: reciprocated ordered pairs over links. Empty when L == 0.

inline std::optional<double> reciprocity(const Digraph& g) {
  if (g.edge_count() == 0) return std::nullopt;
  return double(dyad_census(g).reciprocated) / double(g.edge_count());
}

// ---------------------------------------------------------------------------
// Gini index

inline double gini(std::span<const double> values) {
  if (values.empty()) throw DegenerateError("Gini index of an empty sequence");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v)
    if (x < 0 || !std::isfinite(x)) throw ParameterError("Gini index needs finite non-negative values");
  std::sort(v.begin(), v.end());
  long double weighted = 0;
  long double total = 0;
  const long double n = static_cast<long double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    weighted += (2.0L * (i + 1) - n - 1) * v[i];
    total += v[i];
  }
  if (total == 0) throw DegenerateError("Gini index of an all-zero sequence");
  return static_cast<double>(weighted / (n * total));
}

// ---------------------------------------------------------------------------
// Centralities on the undirected projection of the largest weak component.

enum class Centrality : std::uint8_t { degree, closeness, betweenness, eigenvector };
inline constexpr std::array<Centrality, 4> kCentralities = {
    Centrality::degree, Centrality::closeness, Centrality::betweenness, Centrality::eigenvector};

inline constexpr std::string_view to_string(Centrality c) {
  switch (c) {
    case Centrality::degree: return "degree";
    case Centrality::closeness: return "closeness";
    case Centrality::betweenness: return "betweenness";
    case Centrality::eigenvector: return "eigenvector";
  }
  return "?";
}

struct CentralityOptions {
  double eigen_tolerance = 1e-10;
  std::size_t eigen_max_iterations = 200000;
};

struct CentralityReport {
  std::vector<NodeId> nodes;             // component members (original ids)
  std::vector<double> degree;            // k_i
  std::vector<double> closeness;         // (n-1) / sum of distances
  std::vector<double> betweenness;       // shortest-path pair count / ((n-1)(n-2)/2)
  std::vector<double> betweenness_raw;   // unordered pairs, unnormalised
  std::vector<double> eigenvector;       // principal eigenvector, max 1
  bool trivial = false;                  // single-node component: all zero

  // Values feeding the centralization index for each measure, on the scale
  // its star-graph maximum is expressed in.
  std::span<const double> centralization_scale(Centrality c) const {
    switch (c) {
      case Centrality::degree: return degree;
      case Centrality::closeness: return closeness;
      case Centrality::betweenness: return betweenness_raw;
      case Centrality::eigenvector: return eigenvector_unit_sum;
    }
    return {};
  }
  std::span<const double> values(Centrality c) const {
    switch (c) {
      case Centrality::degree: return degree;
      case Centrality::closeness: return closeness;
      case Centrality::betweenness: return betweenness;
      case Centrality::eigenvector: return eigenvector;
    }
    return {};
  }

  std::vector<double> eigenvector_unit_sum;  // eigenvector rescaled to sum 1
};

inline std::vector<NodeId> largest_weak_component(const Digraph& g) {
  if (g.node_count() == 0) return {};
  const auto wccs = weakly_connected_components(g);
  return wccs[largest_class(wccs)];
}

namespace detail {

// Brandes accumulation; returns unordered-pair betweenness.
inline std::vector<double> brandes(const UndirectedGraph& ug) {
  const std::size_t n = ug.node_count();
  std::vector<double> bc(n, 0.0);
  std::vector<std::int64_t> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId v = order[head];
      for (NodeId w : ug.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (std::size_t k = order.size(); k-- > 0;) {
      const NodeId w = order[k];
      for (NodeId v : ug.neighbors(w))
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  for (double& b : bc) b /= 2.0;
  return bc;
}

inline std::vector<std::int64_t> bfs_distances(const UndirectedGraph& ug, NodeId s) {
  std::vector<std::int64_t> dist(ug.node_count(), -1);
  std::vector<NodeId> queue{s};
  dist[s] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId w : ug.neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

// Power iteration on A + I (same eigenvectors as A, and the shift keeps the
// Perron root dominant on bipartite graphs). Iterates are scaled to max 1.
inline std::vector<double> principal_eigenvector(const UndirectedGraph& ug, double tol,
                                                 std::size_t max_iter) {
  const std::size_t n = ug.node_count();
  std::vector<double> v(n, 1.0);
  std::vector<double> next(n);
  double residual = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (NodeId u = 0; u < n; ++u) {
      double s = v[u];
      for (NodeId w : ug.neighbors(u)) s += v[w];
      next[u] = s;
    }
    const double top = *std::max_element(next.begin(), next.end());
    residual = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      next[u] /= top;
      residual = std::max(residual, std::abs(next[u] - v[u]));
    }
    v.swap(next);
    if (residual < tol) return v;
  }
  throw ConvergenceError("eigenvector power iteration did not converge", residual, max_iter);
}

}  // namespace detail

// Centralities of a connected undirected graph.
inline CentralityReport centralities_of(const UndirectedGraph& ug, const CentralityOptions& opt = {}) {
  CentralityReport r;
  const std::size_t n = ug.node_count();
  r.nodes.resize(n);
  std::iota(r.nodes.begin(), r.nodes.end(), NodeId{0});
  r.degree.assign(n, 0.0);
  r.closeness.assign(n, 0.0);
  r.betweenness.assign(n, 0.0);
  r.betweenness_raw.assign(n, 0.0);
  r.eigenvector.assign(n, 0.0);
  r.eigenvector_unit_sum.assign(n, 0.0);
  if (n <= 1) {
    r.trivial = true;
    return r;
  }
  for (NodeId v = 0; v < n; ++v) {
    r.degree[v] = static_cast<double>(ug.degree(v));
    const auto dist = detail::bfs_distances(ug, v);
    std::int64_t total = 0;
    for (auto d : dist) {
      if (d < 0) throw ContractError("centralities_of requires a connected graph");
      total += d;
    }
    r.closeness[v] = double(n - 1) / double(total);
  }
  r.betweenness_raw = detail::brandes(ug);
  const double pairs = n > 2 ? double(n - 1) * double(n - 2) / 2.0 : 0.0;
  for (NodeId v = 0; v < n; ++v) r.betweenness[v] = pairs > 0 ? r.betweenness_raw[v] / pairs : 0.0;
  r.eigenvector = detail::principal_eigenvector(ug, opt.eigen_tolerance, opt.eigen_max_iterations);
  const double sum = std::accumulate(r.eigenvector.begin(), r.eigenvector.end(), 0.0);
  for (NodeId v = 0; v < n; ++v) r.eigenvector_unit_sum[v] = r.eigenvector[v] / sum;
  return r;
}

inline CentralityReport centralities(const Digraph& g, const CentralityOptions& opt = {}) {
  const auto comp = largest_weak_component(g);
  CentralityReport r = centralities_of(undirected_projection(induced_subgraph(g, comp)), opt);
  r.nodes = comp;
  return r;
}

// Degree centrality alone on the largest weak component, for graphs too big
// for the shortest-path measures.
inline std::vector<double> degree_centrality(const Digraph& g) {
  const auto ug = undirected_projection(induced_subgraph(g, largest_weak_component(g)));
  std::vector<double> k(ug.node_count());
  for (NodeId v = 0; v < ug.node_count(); ++v) k[v] = static_cast<double>(ug.degree(v));
  return k;
}

// Star-graph maximum of sum(c* - c_i) for each measure on n nodes.
inline double centralization_denominator(Centrality c, std::size_t n) {
  const double N = static_cast<double>(n);
  switch (c) {
    case Centrality::degree: return (N - 1) * (N - 2);
    case Centrality::closeness: return (N - 1) * (N - 2) / (2 * N - 3);
    case Centrality::betweenness: return (N - 1) * (N - 1) * (N - 2) / 2;
    case Centrality::eigenvector: {
      const double r = std::sqrt(N - 1);
      return (r - 1) * (N - 1) / (r + N - 1);
    }
  }
  return 0.0;
}

inline double centralization_index(Centrality c, std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) throw ParameterError("centralization needs at least three nodes");
  const double top = *std::max_element(values.begin(), values.end());
  long double gap = 0;
  for (double v : values) gap += top - v;
  return static_cast<double>(gap / centralization_denominator(c, n));
}

inline double centralization(const CentralityReport& r, Centrality c) {
  return centralization_index(c, r.centralization_scale(c));
}

inline double centralization(const Digraph& g, Centrality c) {
  return centralization(centralities(g), c);
}

// ---------------------------------------------------------------------------
// Small-world measures on the giant weak component.

enum class AplMode { exact, sampled };

struct SmallWorldOptions {
  std::size_t exact_limit = 20000;  // exact all-sources BFS up to this many nodes
  std::size_t sample_sources = 1000;
  std::uint64_t seed = 1;
};

struct SmallWorldReport {
  double apl = 0.0;
  double clustering = 0.0;
  double er_clustering = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  AplMode mode = AplMode::exact;
  std::size_t sources = 0;
};

// Global clustering: closed triplets over connected triplets (0 without triplets).
inline double global_clustering(const UndirectedGraph& ug) {
  long double closed = 0;
  long double triples = 0;
  for (NodeId u = 0; u < ug.node_count(); ++u) {
    const auto nu = ug.neighbors(u);
    const long double d = static_cast<long double>(nu.size());
    triples += d * (d - 1) / 2;
    for (NodeId w : nu) {
      if (w <= u) continue;
      const auto nw = ug.neighbors(w);
      std::size_t i = 0, j = 0, common = 0;
      while (i < nu.size() && j < nw.size()) {
        if (nu[i] < nw[j]) ++i;
        else if (nu[i] > nw[j]) ++j;
        else { ++common; ++i; ++j; }
      }
      closed += common;  // each triangle is seen from its three edges
    }
  }
  return triples > 0 ? static_cast<double>(closed / triples) : 0.0;
}

inline SmallWorldReport small_world_of(const UndirectedGraph& ug, const SmallWorldOptions& opt = {}) {
  const std::size_t n = ug.node_count();
  if (n < 2) throw ParameterError("small-world measures need a component with at least two nodes");
  SmallWorldReport r;
  r.n = n;
  r.m = ug.edge_count();
  std::vector<NodeId> sources(n);
  std::iota(sources.begin(), sources.end(), NodeId{0});
  if (n > opt.exact_limit && opt.sample_sources < n) {
    r.mode = AplMode::sampled;
    Rng rng(opt.seed);
    for (std::size_t i = 0; i < opt.sample_sources; ++i)
      std::swap(sources[i], sources[i + rng.below(n - i)]);
    sources.resize(opt.sample_sources);
    std::sort(sources.begin(), sources.end());
  }
  r.sources = sources.size();
  long double total = 0;
  std::uint64_t pairs = 0;
  for (NodeId s : sources) {
    for (auto d : detail::bfs_distances(ug, s))
      if (d > 0) {
        total += d;
        ++pairs;
      }
  }
  r.apl = pairs > 0 ? static_cast<double>(total / pairs) : 0.0;
  r.clustering = global_clustering(ug);
  r.er_clustering = 2.0 * double(r.m) / (double(n) * double(n - 1));
  return r;
}

inline SmallWorldReport small_world(const Digraph& g, const SmallWorldOptions& opt = {}) {
  const auto comp = largest_weak_component(g);
  return small_world_of(undirected_projection(induced_subgraph(g, comp)), opt);
}

// ---------------------------------------------------------------------------
// Hub-and-leaves toy model

struct ToyModelParams {
  std::uint32_t hubs = 1;    // N_h >= 1
  std::uint32_t leaves = 0;  // N_l per hub

  std::uint64_t node_count() const { return std::uint64_t(hubs) * (leaves + 1); }
};

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return double(num) / double(den); }
};

// Clique on the hubs (ids 0..N_h-1) plus N_l pendant leaves on each hub,
// every edge stored in both directions.
inline Digraph toy_model_graph(const ToyModelParams& p) {
  if (p.hubs < 1) throw ParameterError("toy model needs at least one hub");
  std::vector<Edge> und;
  for (NodeId a = 0; a < p.hubs; ++a)
    for (NodeId b = a + 1; b < p.hubs; ++b) und.push_back({a, b});
  NodeId next = p.hubs;
  for (NodeId h = 0; h < p.hubs; ++h)
    for (std::uint32_t l = 0; l < p.leaves; ++l) und.push_back({h, next++});
  return symmetric_digraph(p.node_count(), und);
}

// G_k = (N_h + N_l - 2) N_l / ((N_l + 1)((N_h - 1) + 2 N_l)).
inline Fraction toy_gini_closed_form(const ToyModelParams& p) {
  const std::int64_t h = p.hubs;
  const std::int64_t l = p.leaves;
  const std::int64_t den = (l + 1) * ((h - 1) + 2 * l);
  if (den == 0) throw DegenerateError("toy model without edges");
  return {(h + l - 2) * l, den};
}

// C_k = ((N_h - 1) + N_l - 1) N_h N_l / ((N - 1)(N - 2)), N = N_h (N_l + 1).
inline Fraction toy_centralization_closed_form(const ToyModelParams& p) {
  const std::int64_t h = p.hubs;
  const std::int64_t l = p.leaves;
  const std::int64_t n = h * (l + 1);
  if (n < 3) throw ParameterError("centralization needs at least three nodes");
  return {((h - 1) + l - 1) * h * l, (n - 1) * (n - 2)};
}

}  // namespace bunmeso
