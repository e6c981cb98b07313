#include <gtest/gtest.h>

#include <sstream>

#include "bunmeso/clustering.hpp"

using namespace bunmeso;

namespace {

TransactionRecord tx(std::string id, Timestamp t, std::vector<TxOutput> in, std::vector<TxOutput> out) {
  return {std::move(id), t, std::move(in), std::move(out)};
}

bool same(const UserPartition& p, const char* a, const char* b) {
  return *p.user_of(std::string_view(a)) == *p.user_of(std::string_view(b));
}

}  // namespace

TEST(MultiInput, MergesInputs) {
  UserPartition p;
  process_transaction(p, tx("t", 1, {{"A", 5}, {"B", 5}}, {{"C", 9}}), {true, false});
  EXPECT_TRUE(same(p, "A", "B"));
  EXPECT_FALSE(same(p, "A", "C"));
}

TEST(MultiInput, SingleInputNoMerge) {
  UserPartition p;
  EXPECT_EQ(apply_multi_input(p, tx("t", 1, {{"A", 5}}, {{"C", 1}})), 0u);
  EXPECT_EQ(p.user_count(), 1u);
}

TEST(MultiInput, Transitive) {
  UserPartition p;
  process_transaction(p, tx("t1", 1, {{"A", 1}, {"B", 1}}, {{"X", 1}}), {true, false});
  process_transaction(p, tx("t2", 2, {{"B", 1}, {"C", 1}}, {{"Y", 1}}), {true, false});
  EXPECT_TRUE(same(p, "A", "C"));
  EXPECT_EQ(p.user_of(std::string_view("C")), p.user_of(std::string_view("A")));
}

TEST(ChangeAddress, SingleNewSmallerOutputMerges) {
  UserPartition p;
  process_transaction(p, tx("t0", 0, {{"Z", 9}}, {{"D", 1}}));  // D seen before
  process_transaction(p, tx("t1", 1, {{"A", 5}, {"B", 4}}, {{"C", 2}, {"D", 7}}));
  EXPECT_TRUE(same(p, "C", "A"));
  EXPECT_FALSE(same(p, "D", "A"));
}

TEST(ChangeAddress, NewButLargerOutputIsIgnored) {
  UserPartition p;
  // C is new and small; E is new but 7 is not below min(5,4), so C alone qualifies.
  process_transaction(p, tx("t1", 1, {{"A", 5}, {"B", 4}}, {{"C", 2}, {"E", 7}}));
  EXPECT_TRUE(same(p, "C", "A"));
  EXPECT_FALSE(same(p, "E", "A"));
}

TEST(ChangeAddress, AmbiguousMergesNothing) {
  UserPartition p;
  process_transaction(p, tx("t1", 1, {{"A", 5}}, {{"C", 1}, {"D", 2}}), {false, true});
  EXPECT_FALSE(same(p, "C", "A"));
  EXPECT_FALSE(same(p, "D", "A"));
}

TEST(ChangeAddress, StrictInequality) {
  UserPartition p;
  process_transaction(p, tx("t1", 1, {{"A", 5}, {"B", 4}}, {{"C", 4}}), {false, true});
  EXPECT_FALSE(same(p, "C", "A"));
}

TEST(ChangeAddress, SeenAddressIsNotNew) {
  UserPartition p;
  process_transaction(p, tx("t0", 0, {{"Q", 9}}, {{"C", 3}}), {false, false});
  process_transaction(p, tx("t1", 1, {{"A", 5}}, {{"C", 1}}), {false, true});
  EXPECT_FALSE(same(p, "C", "A"));
}

TEST(ChangeAddress, CoinbaseIgnored) {
  UserPartition p;
  process_transaction(p, tx("cb", 0, {}, {{"M", 50}}));
  EXPECT_EQ(p.user_count(), 1u);
  EXPECT_TRUE(p.seen(*p.lookup("M")));
}

TEST(Partition, ConservationAndRefinement) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthParams sp;
    sp.seed = seed;
    sp.n_tx = 400;
    const auto chain = generate_synthetic_chain(sp);
    UserPartition both, multi;
    for (const auto& t : chain) {
      process_transaction(both, t, {true, true});
      process_transaction(multi, t, {true, false});
    }
    std::size_t total = 0;
    for (const auto& [u, n] : both.user_sizes()) total += n;
    EXPECT_EQ(total, both.address_count());
    EXPECT_EQ(both.user_sizes().size(), both.user_count());
    EXPECT_GE(multi.user_count(), both.user_count());
    // Multi-input alone refines the combined partition.
    for (AddressId a = 0; a < multi.address_count(); ++a)
      for (AddressId b = a + 1; b < std::min<std::size_t>(multi.address_count(), a + 40); ++b)
        if (multi.same_user(a, b)) {
          const auto ba = both.lookup(multi.address(a));
          const auto bb = both.lookup(multi.address(b));
          EXPECT_TRUE(both.same_user(*ba, *bb));
        }
  }
}

TEST(Partition, UsersOnlyGrow) {
  SynthParams sp;
  sp.n_tx = 300;
  const auto chain = generate_synthetic_chain(sp);
  UserPartition p;
  std::vector<std::pair<std::string, std::string>> merged;
  for (const auto& t : chain) {
    process_transaction(p, t);
    for (const auto& [a, b] : merged) EXPECT_TRUE(same(p, a.c_str(), b.c_str()));
    if (t.inputs.size() >= 2) merged.emplace_back(t.inputs[0].address, t.inputs[1].address);
  }
}

TEST(UserGraph, SingleEdge) {
  UserPartition p;
  const std::vector<TransactionRecord> r = {tx("t", 1, {{"A", 5}}, {{"B", 5}})};
  for (const auto& t : r) process_transaction(p, t);
  const auto ug = build_user_graph(r, p);
  EXPECT_EQ(ug.graph.node_count(), 2u);
  ASSERT_EQ(ug.graph.edge_count(), 1u);
  const Edge e = ug.graph.edges()[0];
  EXPECT_EQ(ug.users[e.from], *p.user_of(std::string_view("A")));
  EXPECT_EQ(ug.users[e.to], *p.user_of(std::string_view("B")));
}

TEST(UserGraph, SelfLoopsDropped) {
  UserPartition p;
  // C becomes change of A, so all legs belong to one user.
  const std::vector<TransactionRecord> r = {tx("t", 1, {{"A", 5}}, {{"C", 2}})};
  for (const auto& t : r) process_transaction(p, t);
  const auto ug = build_user_graph(r, p);
  EXPECT_EQ(ug.graph.node_count(), 1u);
  EXPECT_EQ(ug.graph.edge_count(), 0u);
}

TEST(UserGraph, ParallelTransactionsGiveOneEdge) {
  UserPartition p;
  const std::vector<TransactionRecord> r = {tx("t1", 1, {{"A", 5}}, {{"B", 5}}),
                                            tx("t2", 2, {{"A", 5}}, {{"B", 6}})};
  for (const auto& t : r) process_transaction(p, t);
  EXPECT_EQ(build_user_graph(r, p).graph.edge_count(), 1u);
}

TEST(UserGraph, MissingAddressIsAContractError) {
  UserPartition p;
  const std::vector<TransactionRecord> r = {tx("t", 1, {{"A", 5}}, {{"B", 5}})};
  EXPECT_THROW(build_user_graph(r, p), ContractError);
}

TEST(EdgeList, RoundTripAndSidecar) {
  SynthParams sp;
  sp.n_tx = 200;
  const auto chain = generate_synthetic_chain(sp);
  UserPartition p;
  for (const auto& t : chain) process_transaction(p, t);
  const auto ug = build_user_graph(chain, p);
  std::stringstream s;
  write_edge_list(ug.graph, s);
  EXPECT_EQ(read_edge_list(s), ug.graph);
  const auto side = user_sidecar(ug, p);
  ASSERT_EQ(side["nodes"].size(), ug.graph.node_count());
  std::size_t addresses = 0;
  for (const auto& n : side["nodes"]) addresses += n["addresses"].size();
  EXPECT_LE(addresses, p.address_count());

  std::istringstream bad("3\n1\n0 7\n");
  EXPECT_THROW(read_edge_list(bad), ParseError);
}
