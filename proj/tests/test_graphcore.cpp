#include <gtest/gtest.h>

#include <numeric>

#include "bunmeso/graphcore.hpp"
#include "oracles.hpp"

using namespace bunmeso;

namespace {

// 1-based fixture ids, shifted to 0-based nodes.
Digraph one_based(std::size_t n, std::vector<std::pair<int, int>> edges) {
  std::vector<Edge> e;
  for (auto [a, b] : edges) e.push_back({NodeId(a - 1), NodeId(b - 1)});
  return Digraph(n, e);
}

}  // namespace

TEST(Graph, DropsSelfLoopsAndDuplicates) {
  const Digraph g(3, {{0, 1}, {0, 1}, {1, 1}, {2, 0}});
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(1, 1));
  EXPECT_THROW(Digraph(2, {{0, 2}}), ParameterError);
}

TEST(Degrees, Basics) {
  EXPECT_TRUE(degrees(Digraph()).in.empty());
  const auto t = degrees(Digraph(2, {{0, 1}}));
  EXPECT_EQ(t.out[0], 1u);
  EXPECT_EQ(t.in[1], 1u);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = oracle::random_digraph(20, 0.2, seed);
    const auto d = degrees(g);
    EXPECT_EQ(std::accumulate(d.in.begin(), d.in.end(), 0ull), g.edge_count());
    EXPECT_EQ(std::accumulate(d.out.begin(), d.out.end(), 0ull), g.edge_count());
  }
}

TEST(Scc, SmallCases) {
  const auto two = strongly_connected_components(Digraph(2, {{0, 1}, {1, 0}}));
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0], (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(strongly_connected_components(Digraph(3, {{0, 1}, {1, 2}})).size(), 3u);
}

TEST(Scc, MatchesReachabilityOracle) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const double p = 0.02 + 0.1 * double(seed % 7) / 7;
    const auto g = oracle::random_digraph(30, p, seed);
    EXPECT_EQ(strongly_connected_components(g), oracle::scc_classes(g)) << "seed " << seed;
  }
}

TEST(Scc, DeepPathDoesNotOverflowTheStack) {
  std::vector<Edge> e;
  const NodeId n = 200000;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  e.push_back({n - 1, 0});
  const auto sccs = strongly_connected_components(Digraph(n, e));
  ASSERT_EQ(sccs.size(), 1u);
  EXPECT_EQ(sccs[0].size(), n);
}

TEST(Census, Examples) {
  const auto conn = component_census(oracle::random_symmetric(10, 1.0, 1));
  EXPECT_EQ(conn.n_wcc, 1u);
  EXPECT_DOUBLE_EQ(conn.frac_largest_wcc, 1.0);
  EXPECT_FALSE(conn.lcc_ratio_weak.has_value());

  // Two disjoint reciprocated cycles on 4 and 2 nodes.
  const Digraph g(6, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}, {4, 5}, {5, 4}});
  const auto c = component_census(g);
  ASSERT_TRUE(c.lcc_ratio_weak.has_value());
  EXPECT_DOUBLE_EQ(*c.lcc_ratio_weak, 2.0);

  const auto empty = component_census(Digraph());
  EXPECT_EQ(empty.n_wcc, 0u);
  EXPECT_EQ(empty.frac_largest_scc, 0.0);
}

TEST(Census, Invariants) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto g = oracle::random_digraph(25, 0.06, seed);
    const auto c = component_census(g);
    EXPECT_EQ(std::accumulate(c.wcc_sizes.begin(), c.wcc_sizes.end(), 0ull), g.node_count());
    EXPECT_EQ(std::accumulate(c.scc_sizes.begin(), c.scc_sizes.end(), 0ull), g.node_count());
    EXPECT_TRUE(std::is_sorted(c.wcc_sizes.rbegin(), c.wcc_sizes.rend()));
    if (c.lcc_ratio_weak) {
      EXPECT_GE(*c.lcc_ratio_weak, 1.0);
    }
    if (c.lcc_ratio_strong) {
      EXPECT_GE(*c.lcc_ratio_strong, 1.0);
    }
    EXPECT_GE(c.frac_largest_wcc, 0.0);
    EXPECT_LE(c.frac_largest_wcc, 1.0);

    const auto s = oracle::random_symmetric(25, 0.06, seed);
    const auto cs = component_census(s);
    EXPECT_EQ(cs.wcc_sizes, cs.scc_sizes);
  }
}

TEST(BowTie, EightNodeFixture) {
  const auto g = one_based(8, {{1, 2}, {2, 1}, {3, 1}, {2, 4}, {3, 5}, {6, 4}, {3, 7}, {7, 4}});
  const auto bt = bowtie_decompose(g);
  auto ids = [&](BowTieClass c) {
    std::vector<NodeId> v;
    for (NodeId x : bt.members(c)) v.push_back(x + 1);
    return v;
  };
  EXPECT_EQ(ids(BowTieClass::scc), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(ids(BowTieClass::in), (std::vector<NodeId>{3}));
  EXPECT_EQ(ids(BowTieClass::out), (std::vector<NodeId>{4}));
  EXPECT_EQ(ids(BowTieClass::in_tendrils), (std::vector<NodeId>{5}));
  EXPECT_EQ(ids(BowTieClass::out_tendrils), (std::vector<NodeId>{6}));
  EXPECT_EQ(ids(BowTieClass::tubes), (std::vector<NodeId>{7}));
  EXPECT_EQ(ids(BowTieClass::others), (std::vector<NodeId>{8}));
}

TEST(BowTie, TwoCycle) {
  const auto bt = bowtie_decompose(Digraph(2, {{0, 1}, {1, 0}}));
  EXPECT_EQ(bt.count(BowTieClass::scc), 2u);
  EXPECT_EQ(bt.fraction(BowTieClass::scc), 1.0);
}

TEST(BowTie, EmptyGraphThrows) { EXPECT_THROW(bowtie_decompose(Digraph()), EmptyGraphError); }

TEST(BowTie, TieGoesToSmallestNode) {
  const auto bt = bowtie_decompose(Digraph(4, {{2, 3}, {3, 2}, {0, 1}, {1, 0}}));
  EXPECT_EQ(bt.members(BowTieClass::scc), (std::vector<NodeId>{0, 1}));
}

TEST(BowTie, MatchesOracleAndPartitions) {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const std::size_t n = 5 + seed % 46;
    const double p = 1.2 / double(n) + 0.02 * double(seed % 3);
    const auto g = oracle::random_digraph(n, p, seed);
    const auto bt = bowtie_decompose(g);
    EXPECT_EQ(bt.label, oracle::bowtie(g)) << "seed " << seed;
    std::size_t total = 0;
    for (auto c : kBowTieClasses) total += bt.count(c);
    EXPECT_EQ(total, n);
    const auto sccs = strongly_connected_components(g);
    EXPECT_EQ(bt.count(BowTieClass::scc), sccs[largest_class(sccs)].size());
  }
}
