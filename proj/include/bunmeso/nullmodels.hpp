#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bunmeso/error.hpp"
#include "bunmeso/graph.hpp"
#include "bunmeso/rng.hpp"

namespace bunmeso {

// ---------------------------------------------------------------------------
// Dyad census. Abundances are sums over ordered pairs i != j.

struct DyadCensus {
  std::uint64_t empty = 0;         // sum (1-a_ij)(1-a_ji)
  std::uint64_t single = 0;        // sum a_ij(1-a_ji)
  std::uint64_t reciprocated = 0;  // sum a_ij a_ji

  // Counts in dyad units (unordered pairs).
  std::uint64_t empty_dyads() const { return empty / 2; }
  std::uint64_t reciprocated_dyads() const { return reciprocated / 2; }
  bool operator==(const DyadCensus&) const = default;
};

inline DyadCensus dyad_census(const Digraph& g) {
  const std::uint64_t n = g.node_count();
  DyadCensus c;
  for (const Edge& e : g.edges())
    if (g.has_edge(e.to, e.from)) ++c.reciprocated;
  c.single = g.edge_count() - c.reciprocated;
  c.empty = n * (n > 0 ? n - 1 : 0) - 2 * c.single - c.reciprocated;
  return c;
}

// ---------------------------------------------------------------------------
// Directed Binary Configuration Model

inline constexpr double kMaxProbability = 1.0 - 0x1.0p-53;

struct DbcmOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 10000;
  double damping = 0.5;  // weight kept on the previous iterate
};

// Fitted model. Nodes sharing an (out, in) degree pair share parameters, so
// the fit and all ensemble moments work on degree classes.
class DbcmModel {
 public:
  struct DegreeClass {
    std::uint32_t k_out = 0;
    std::uint32_t k_in = 0;
    std::uint64_t count = 0;
    double x = 0.0;  // out-fitness; +inf when every possible out-link is forced
    double y = 0.0;  // in-fitness
  };

  static double probability(double x, double y) {
    if (x == 0.0 || y == 0.0) return 0.0;
    if (std::isinf(x) || std::isinf(y)) return kMaxProbability;
    const double xy = x * y;
    return std::min(kMaxProbability, xy / (1.0 + xy));
  }

  std::size_t node_count() const noexcept { return node_class_.size(); }
  const std::vector<DegreeClass>& classes() const noexcept { return classes_; }
  std::size_t class_of(NodeId v) const { return node_class_[v]; }

  double x(NodeId v) const { return classes_[node_class_[v]].x; }
  double y(NodeId v) const { return classes_[node_class_[v]].y; }

  // Connection probability for i != j.
  double p(NodeId i, NodeId j) const {
    if (i == j) return 0.0;
    return probability(x(i), y(j));
  }

  double expected_out_degree(NodeId v) const { return expected_out(node_class_[v]); }
  double expected_in_degree(NodeId v) const { return expected_in(node_class_[v]); }

  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }
  // Set when some node must link to every available partner (p capped below 1).
  bool near_deterministic() const noexcept { return near_deterministic_; }

  // Builds a model directly from per-node parameters (no fitting). Used for
  // hand-specified ensembles.
  static DbcmModel from_parameters(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw ParameterError("x and y must have equal length");
    DbcmModel m;
    m.node_class_.resize(x.size());
    for (std::size_t v = 0; v < x.size(); ++v) {
      m.node_class_[v] = m.classes_.size();
      m.classes_.push_back({0, 0, 1, x[v], y[v]});
    }
    return m;
  }

 private:
  friend DbcmModel fit_dbcm(const Digraph&, const DbcmOptions&);

  std::uint64_t others(std::size_t c, std::size_t d) const {
    return classes_[d].count - (c == d ? 1 : 0);
  }
  double expected_out(std::size_t c) const {
    long double s = 0;
    for (std::size_t d = 0; d < classes_.size(); ++d)
      s += static_cast<long double>(others(c, d)) * probability(classes_[c].x, classes_[d].y);
    return static_cast<double>(s);
  }
  double expected_in(std::size_t c) const {
    long double s = 0;
    for (std::size_t d = 0; d < classes_.size(); ++d)
      s += static_cast<long double>(others(c, d)) * probability(classes_[d].x, classes_[c].y);
    return static_cast<double>(s);
  }
  double max_residual() const {
    double r = 0.0;
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      r = std::max(r, std::abs(expected_out(c) - classes_[c].k_out));
      r = std::max(r, std::abs(expected_in(c) - classes_[c].k_in));
    }
    return r;
  }

  std::vector<DegreeClass> classes_;
  std::vector<std::size_t> node_class_;
  double residual_ = 0.0;
  std::size_t iterations_ = 0;
  bool near_deterministic_ = false;
};

// Damped fixed-point iteration
//   x_i <- k_out_i / sum_{j!=i} y_j / (1 + x_i y_j)
//   y_i <- k_in_i  / sum_{j!=i} x_j / (1 + x_j y_i)
// until the largest expected-vs-observed degree gap drops below tolerance.
inline DbcmModel fit_dbcm(const Digraph& g, const DbcmOptions& opt = {}) {
  const std::size_t n = g.node_count();
  if (n < 2) throw ParameterError("DBCM needs at least two nodes");
  if (g.edge_count() == 0) throw ParameterError("DBCM needs a graph with at least one edge");
  if (!(opt.damping >= 0.0 && opt.damping < 1.0)) throw ParameterError("damping must be in [0,1)");
  if (!(opt.tolerance > 0.0)) throw ParameterError("tolerance must be > 0");

  DbcmModel m;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index;
  m.node_class_.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto key = std::make_pair(static_cast<std::uint32_t>(g.out_degree(v)),
                                    static_cast<std::uint32_t>(g.in_degree(v)));
    auto [it, inserted] = index.emplace(key, m.classes_.size());
    if (inserted) m.classes_.push_back({key.first, key.second, 0, 0.0, 0.0});
    ++m.classes_[it->second].count;
    m.node_class_[v] = it->second;
  }
  auto& cls = m.classes_;
  const std::size_t nc = cls.size();

  // Nodes with a degree equal to the number of available partners get
  // infinite fitness: all their possible links are certain.
  std::uint64_t with_in = 0;
  std::uint64_t with_out = 0;
  for (const auto& c : cls) {
    if (c.k_in > 0) with_in += c.count;
    if (c.k_out > 0) with_out += c.count;
  }
  const double sqrt_l = std::sqrt(static_cast<double>(g.edge_count()));
  std::vector<char> fixed_x(nc, 0);
  std::vector<char> fixed_y(nc, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    auto& k = cls[c];
    if (k.k_out == 0) {
      fixed_x[c] = 1;
    } else if (k.k_out == with_in - (k.k_in > 0 ? 1 : 0)) {
      k.x = std::numeric_limits<double>::infinity();
      fixed_x[c] = 1;
      m.near_deterministic_ = true;
    } else {
      k.x = k.k_out / sqrt_l;
    }
    if (k.k_in == 0) {
      fixed_y[c] = 1;
    } else if (k.k_in == with_out - (k.k_out > 0 ? 1 : 0)) {
      k.y = std::numeric_limits<double>::infinity();
      fixed_y[c] = 1;
      m.near_deterministic_ = true;
    } else {
      k.y = k.k_in / sqrt_l;
    }
  }

  // a / (1 + a b) with the a = inf limit 1 / b.
  auto ratio = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (std::isinf(a)) return b == 0.0 ? 0.0 : 1.0 / b;
    if (std::isinf(b)) return 0.0;
    return a / (1.0 + a * b);
  };

  std::vector<double> nx(nc);
  std::vector<double> ny(nc);
  m.residual_ = m.max_residual();
  std::size_t it = 0;
  while (m.residual_ >= opt.tolerance && it < opt.max_iterations) {
    for (std::size_t c = 0; c < nc; ++c) {
      nx[c] = cls[c].x;
      ny[c] = cls[c].y;
      if (!fixed_x[c]) {
        long double s = 0;
        for (std::size_t d = 0; d < nc; ++d)
          s += static_cast<long double>(m.others(c, d)) * ratio(cls[d].y, cls[c].x);
        const double update = cls[c].k_out / static_cast<double>(s);
        nx[c] = (1.0 - opt.damping) * update + opt.damping * cls[c].x;
      }
      if (!fixed_y[c]) {
        long double s = 0;
        for (std::size_t d = 0; d < nc; ++d)
          s += static_cast<long double>(m.others(c, d)) * ratio(cls[d].x, cls[c].y);
        const double update = cls[c].k_in / static_cast<double>(s);
        ny[c] = (1.0 - opt.damping) * update + opt.damping * cls[c].y;
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      cls[c].x = nx[c];
      cls[c].y = ny[c];
    }
    ++it;
    m.residual_ = m.max_residual();
    if (!std::isfinite(m.residual_)) break;
  }
  m.iterations_ = it;
  if (!(m.residual_ < opt.tolerance))
    throw ConvergenceError("DBCM fixed point did not converge", m.residual_, it);
  return m;
}

// ---------------------------------------------------------------------------
// Ensemble moments of the dyad abundances. For an unordered pair {i,j} the
// edges i->j and j->i are independent with probabilities p = p_ij, q = p_ji:
//   reciprocated: 2 w.p. pq          single: 1 w.p. p(1-q)+q(1-p)
//   empty:        2 w.p. (1-p)(1-q)
// Pairs are mutually independent, so means and variances add up.

struct DyadMoments {
  double mean_empty = 0, mean_single = 0, mean_reciprocated = 0;
  double var_empty = 0, var_single = 0, var_reciprocated = 0;
};

namespace detail {

struct MomentAccumulator {
  long double me = 0, ms = 0, mr = 0, ve = 0, vs = 0, vr = 0;

  void add_pair(double p, double q, long double weight) {
    const long double pq = static_cast<long double>(p) * q;
    const long double s = static_cast<long double>(p) * (1 - q) + static_cast<long double>(q) * (1 - p);
    const long double e = (1.0L - p) * (1.0L - q);
    mr += weight * 2 * pq;
    vr += weight * 4 * pq * (1 - pq);
    ms += weight * s;
    vs += weight * s * (1 - s);
    me += weight * 2 * e;
    ve += weight * 4 * e * (1 - e);
  }
  DyadMoments result() const {
    return {double(me), double(ms), double(mr), double(ve), double(vs), double(vr)};
  }
};

}  // namespace detail

inline DyadMoments dyad_expectations(const DbcmModel& model) {
  const auto& cls = model.classes();
  detail::MomentAccumulator acc;
  for (std::size_t c = 0; c < cls.size(); ++c) {
    const long double mc = cls[c].count;
    if (cls[c].count >= 2) {
      const double p = DbcmModel::probability(cls[c].x, cls[c].y);
      acc.add_pair(p, p, mc * (mc - 1) / 2);
    }
    for (std::size_t d = c + 1; d < cls.size(); ++d) {
      const double p = DbcmModel::probability(cls[c].x, cls[d].y);
      const double q = DbcmModel::probability(cls[d].x, cls[c].y);
      acc.add_pair(p, q, mc * static_cast<long double>(cls[d].count));
    }
  }
  return acc.result();
}

// ---------------------------------------------------------------------------
// Motif z-scores

enum class Motif : std::uint8_t { empty, single, reciprocated };
inline constexpr std::array<Motif, 3> kMotifs = {Motif::empty, Motif::single, Motif::reciprocated};

inline constexpr std::string_view to_string(Motif m) {
  switch (m) {
    case Motif::empty: return "empty";
    case Motif::single: return "single";
    case Motif::reciprocated: return "reciprocated";
  }
  return "?";
}

enum class Significance : std::uint8_t { low, compatible, high, undefined };

inline constexpr std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::low: return "low";
    case Significance::compatible: return "compatible";
    case Significance::high: return "high";
    case Significance::undefined: return "undefined";
  }
  return "?";
}

struct NullModelZScore {
  Motif motif = Motif::empty;
  double observed = 0;
  double expected = 0;
  double sd = 0;
  std::optional<double> z;  // absent when sd == 0

  Significance classify(double band) const {
    if (!z) return Significance::undefined;
    if (*z > band) return Significance::high;
    if (*z < -band) return Significance::low;
    return Significance::compatible;
  }
  Significance significance() const { return classify(3.0); }
  Significance band2() const { return classify(2.0); }
};

inline std::array<NullModelZScore, 3> motif_zscores(const DyadCensus& census,
                                                    const DyadMoments& moments) {
  auto make = [](Motif m, double obs, double mean, double var) {
    NullModelZScore z;
    z.motif = m;
    z.observed = obs;
    z.expected = mean;
    z.sd = std::sqrt(std::max(0.0, var));
    if (z.sd > 0) z.z = (obs - mean) / z.sd;
    return z;
  };
  return {make(Motif::empty, double(census.empty), moments.mean_empty, moments.var_empty),
          make(Motif::single, double(census.single), moments.mean_single, moments.var_single),
          make(Motif::reciprocated, double(census.reciprocated), moments.mean_reciprocated,
               moments.var_reciprocated)};
}

inline std::array<NullModelZScore, 3> motif_zscores(const Digraph& g, const DbcmModel& model) {
  if (model.node_count() != g.node_count()) throw ContractError("model does not match the graph");
  return motif_zscores(dyad_census(g), dyad_expectations(model));
}

// ---------------------------------------------------------------------------
// Samplers

// One independent Bernoulli draw per ordered pair.
inline Digraph sample_dbcm(const DbcmModel& model, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = model.node_count();
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (i != j) {
        const double p = model.p(i, j);
        if (p > 0.0 && rng.uniform() < p) edges.push_back({i, j});
      }
  return Digraph(n, std::move(edges));
}

// Uniform undirected graph with exactly m edges (Floyd's subset sampling),
// returned with each edge in both directions.
inline Digraph erdos_renyi_gm(std::size_t n, std::uint64_t m, std::uint64_t seed) {
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;
  if (m > total) throw ParameterError("m exceeds n(n-1)/2");
  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m * 2);
  for (std::uint64_t j = total - m; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  // Pair index k enumerates (u,v), u < v, row by row.
  auto row_start = [n](std::uint64_t u) { return u * (2 * n - u - 1) / 2; };
  std::vector<Edge> undirected;
  undirected.reserve(m);
  for (std::uint64_t k : chosen) {
    std::uint64_t lo = 0;
    std::uint64_t hi = n - 1;
    while (lo + 1 < hi) {
      const std::uint64_t mid = (lo + hi) / 2;
      if (row_start(mid) <= k) lo = mid; else hi = mid;
    }
    const std::uint64_t v = lo + 1 + (k - row_start(lo));
    undirected.push_back({static_cast<NodeId>(lo), static_cast<NodeId>(v)});
  }
  return symmetric_digraph(n, undirected);
}

}  // namespace bunmeso
