#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bunmeso/error.hpp"
#include "bunmeso/graph.hpp"
#include "bunmeso/graphcore.hpp"

namespace bunmeso {

// Counts for surprise evaluation. Pairs are ordered (directed convention).
struct SurpriseInput {
  std::uint64_t V = 0;             // total pairs, N(N-1)
  std::uint64_t V_bullet = 0;      // intracluster (core) pairs
  std::uint64_t V_circ = 0;        // second-class (periphery) pairs; multivariate only
  std::uint64_t L = 0;             // total links
  std::uint64_t l_bullet_star = 0; // observed intracluster links
  std::uint64_t l_circ_star = 0;   // observed second-class links; multivariate only
};

struct SurpriseResult {
  double pvalue = 1.0;
  double log_pvalue = 0.0;  // natural log
};

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

namespace detail {

// Running log(sum(exp(x_i))).
class LogSum {
 public:
  void add(double x) {
    if (x == -kInf) return;
    if (max_ == -kInf) {
      max_ = x;
      scaled_ = 1.0;
    } else if (x <= max_) {
      scaled_ += std::exp(x - max_);
    } else {
      scaled_ = scaled_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == -kInf ? -kInf : max_ + std::log(scaled_); }
  bool empty() const { return max_ == -kInf; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  double max_ = -kInf;
  double scaled_ = 0.0;
};

inline constexpr double kLogDropRatio = -39.14;  // log(1e-17)

// log sum_{j >= lo} C(K, j) C(R, m - j). The summand is log-concave in j, so
// accumulation starts at the mode and walks outwards until terms fall below
// 1e-17 of the largest term on that side.
inline double log_hypergeometric_tail_mass(std::uint64_t K, std::uint64_t R, std::uint64_t m,
                                           std::uint64_t lo) {
  const std::uint64_t support_lo = m > R ? m - R : 0;
  const std::uint64_t start = std::max(lo, support_lo);
  const std::uint64_t stop = std::min(m, K);
  if (start > stop) return -std::numeric_limits<double>::infinity();
  auto term = [&](std::uint64_t j) { return log_binomial(K, j) + log_binomial(R, m - j); };

  // Mode of the hypergeometric pmf in j, clamped to the summation range.
  const long double mode_ld = std::floor(static_cast<long double>(m + 1) * (K + 1) /
                                         static_cast<long double>(K + R + 2));
  std::uint64_t mode = static_cast<std::uint64_t>(std::max<long double>(0, mode_ld));
  mode = std::clamp(mode, start, stop);

  LogSum sum;
  const double peak = term(mode);
  sum.add(peak);
  for (std::uint64_t j = mode; j > start;) {
    --j;
    const double t = term(j);
    sum.add(t);
    if (t - peak < kLogDropRatio) break;
  }
  for (std::uint64_t j = mode + 1; j <= stop; ++j) {
    const double t = term(j);
    sum.add(t);
    if (t - peak < kLogDropRatio) break;
  }
  return sum.value();
}

inline SurpriseResult from_log(double log_p) {
  log_p = std::min(0.0, log_p);
  return {std::exp(log_p), log_p};
}

}  // namespace detail

// Hypergeometric upper tail P(l >= l_bullet_star) for L draws from V pairs of
// which V_bullet are intracluster. V_circ is ignored (it is V - V_bullet here).
inline SurpriseResult surprise_univariate(const SurpriseInput& in) {
  if (in.V_bullet > in.V) throw DomainError("V_bullet exceeds V");
  if (in.L > in.V) throw DomainError("L exceeds V");
  if (in.l_bullet_star > std::min(in.L, in.V_bullet))
    throw DomainError("l_bullet_star exceeds min(L, V_bullet)");
  const std::uint64_t rest = in.V - in.V_bullet;
  if (in.L - in.l_bullet_star > rest) throw DomainError("observed links do not fit the pair counts");
  const std::uint64_t support_lo = in.L > rest ? in.L - rest : 0;
  if (in.l_bullet_star <= support_lo) return {1.0, 0.0};
  const double log_num =
      detail::log_hypergeometric_tail_mass(in.V_bullet, rest, in.L, in.l_bullet_star);
  return detail::from_log(log_num - log_binomial(in.V, in.L));
}

// Multivariate hypergeometric tail P(i >= l_bullet_star, j >= l_circ_star)
// with three pair classes: V_bullet, V_circ and the remaining V - V_bullet - V_circ.
inline SurpriseResult surprise_multivariate(const SurpriseInput& in) {
  if (in.V_bullet + in.V_circ > in.V) throw DomainError("V_bullet + V_circ exceeds V");
  if (in.L > in.V) throw DomainError("L exceeds V");
  if (in.l_bullet_star > std::min(in.L, in.V_bullet))
    throw DomainError("l_bullet_star exceeds min(L, V_bullet)");
  if (in.l_circ_star > std::min(in.L, in.V_circ))
    throw DomainError("l_circ_star exceeds min(L, V_circ)");
  if (in.l_bullet_star + in.l_circ_star > in.L)
    throw DomainError("l_bullet_star + l_circ_star exceeds L");
  const std::uint64_t rest = in.V - in.V_bullet - in.V_circ;
  if (in.L - in.l_bullet_star - in.l_circ_star > rest)
    throw DomainError("observed links do not fit the pair counts");
  if (in.l_bullet_star == 0 && in.l_circ_star == 0) return {1.0, 0.0};

  // Rows i >= l_bullet_star; each row is a univariate tail over j and is
  // bounded by the i-marginal M(i) = C(V_bullet,i) C(V-V_bullet,L-i). M is
  // log-concave, so once it decreases every later row is below M(i+1).
  detail::LogSum total;
  const std::uint64_t i_stop = std::min(in.L, in.V_bullet);
  auto log_marginal = [&](std::uint64_t i) {
    return log_binomial(in.V_bullet, i) + log_binomial(in.V - in.V_bullet, in.L - i);
  };
  double marginal = log_marginal(in.l_bullet_star);
  for (std::uint64_t i = in.l_bullet_star; i <= i_stop; ++i) {
    const double row =
        detail::log_hypergeometric_tail_mass(in.V_circ, rest, in.L - i, in.l_circ_star);
    total.add(log_binomial(in.V_bullet, i) + row);
    if (i == i_stop) break;
    const double next = log_marginal(i + 1);
    if (next < marginal && !total.empty() &&
        next + std::log(static_cast<double>(i_stop - i)) - total.value() < detail::kLogDropRatio)
      break;
    marginal = next;
  }
  return detail::from_log(total.value() - log_binomial(in.V, in.L));
}

struct CorePeripheryResult {
  std::vector<NodeId> core;
  std::vector<NodeId> periphery;
  SurpriseInput counts;
  double surprise_pvalue = 1.0;
  double log_surprise = 0.0;
  bool significant = false;
  bool degenerate = false;  // core smaller than two nodes, or no periphery
};

inline constexpr double kDefaultSignificance = 0.05;

// Scores an arbitrary core/periphery split given as a per-node core flag.
inline CorePeripheryResult evaluate_core_periphery(const Digraph& g, const std::vector<char>& is_core,
                                                   double threshold = kDefaultSignificance) {
  if (is_core.size() != g.node_count()) throw ContractError("core mask does not match the graph");
  CorePeripheryResult r;
  for (NodeId v = 0; v < g.node_count(); ++v) (is_core[v] ? r.core : r.periphery).push_back(v);
  const std::uint64_t n = g.node_count();
  const std::uint64_t c = r.core.size();
  const std::uint64_t p = r.periphery.size();
  r.counts.V = n * (n > 0 ? n - 1 : 0);
  r.counts.V_bullet = c * (c > 0 ? c - 1 : 0);
  r.counts.V_circ = p * (p > 0 ? p - 1 : 0);
  r.counts.L = g.edge_count();
  for (const Edge& e : g.edges()) {
    if (is_core[e.from] && is_core[e.to]) ++r.counts.l_bullet_star;
    if (!is_core[e.from] && !is_core[e.to]) ++r.counts.l_circ_star;
  }
  if (c < 2) {
    r.degenerate = true;
    return r;
  }
  // Without a periphery the second class is empty and the split reduces to
  // the univariate case.
  if (p == 0) r.degenerate = true;
  const SurpriseResult s =
      p == 0 ? surprise_univariate(r.counts) : surprise_multivariate(r.counts);
  r.surprise_pvalue = s.pvalue;
  r.log_surprise = s.log_pvalue;
  r.significant = s.pvalue < threshold;
  return r;
}

// Core = SCC class of the bow-tie, periphery = every other node.
inline CorePeripheryResult evaluate_bowtie_core_periphery(const Digraph& g,
                                                          const BowTiePartition& bt,
                                                          double threshold = kDefaultSignificance) {
  if (bt.label.size() != g.node_count())
    throw ContractError("bow-tie partition does not match the graph");
  std::vector<char> is_core(g.node_count(), 0);
  for (NodeId v = 0; v < g.node_count(); ++v) is_core[v] = bt.label[v] == BowTieClass::scc;
  return evaluate_core_periphery(g, is_core, threshold);
}

}  // namespace bunmeso
