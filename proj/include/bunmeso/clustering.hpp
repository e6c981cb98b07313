#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bunmeso/graph.hpp"
#include "bunmeso/ingest.hpp"
#include "json.hpp"

namespace bunmeso {

using AddressId = std::uint32_t;
// A user is identified by the id of its earliest-interned address, so ids do
// not depend on union order.
using UserId = std::uint32_t;

// Disjoint-set forest over interned addresses, plus the set of addresses
// already observed in chronological processing.
class UserPartition {
 public:
  AddressId intern(std::string_view address) {
    auto it = index_.find(std::string(address));
    if (it != index_.end()) return it->second;
    const auto id = static_cast<AddressId>(names_.size());
    index_.emplace(std::string(address), id);
    names_.emplace_back(address);
    parent_.push_back(id);
    size_.push_back(1);
    label_.push_back(id);
    seen_.push_back(0);
    ++users_;
    return id;
  }

  std::optional<AddressId> lookup(std::string_view address) const {
    auto it = index_.find(std::string(address));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& address(AddressId a) const { return names_[a]; }
  std::size_t address_count() const noexcept { return names_.size(); }
  std::size_t user_count() const noexcept { return users_; }

  UserId user_of(AddressId a) const { return label_[root(a)]; }

  std::optional<UserId> user_of(std::string_view address) const {
    auto a = lookup(address);
    if (!a) return std::nullopt;
    return user_of(*a);
  }

  bool same_user(AddressId a, AddressId b) const { return root(a) == root(b); }

  // Returns true if two distinct users were merged.
  bool unite(AddressId a, AddressId b) {
    AddressId ra = root(a);
    AddressId rb = root(b);
    if (ra == rb) return false;
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    label_[ra] = std::min(label_[ra], label_[rb]);
    --users_;
    compress(a, ra);
    compress(b, ra);
    return true;
  }

  bool seen(AddressId a) const { return seen_[a] != 0; }
  void mark_seen(AddressId a) { seen_[a] = 1; }

  // Size of each user, keyed by user id.
  std::map<UserId, std::size_t> user_sizes() const {
    std::map<UserId, std::size_t> sizes;
    for (AddressId a = 0; a < names_.size(); ++a) ++sizes[user_of(a)];
    return sizes;
  }

  std::map<UserId, std::vector<std::string>> members() const {
    std::map<UserId, std::vector<std::string>> out;
    for (AddressId a = 0; a < names_.size(); ++a) out[user_of(a)].push_back(names_[a]);
    return out;
  }

 private:
  AddressId root(AddressId a) const {
    while (parent_[a] != a) a = parent_[a];
    return a;
  }
  void compress(AddressId a, AddressId r) {
    while (parent_[a] != r) {
      const AddressId next = parent_[a];
      parent_[a] = r;
      a = next;
    }
  }

  std::unordered_map<std::string, AddressId> index_;
  std::vector<std::string> names_;
  std::vector<AddressId> parent_;
  std::vector<std::uint32_t> size_;
  std::vector<UserId> label_;
  std::vector<char> seen_;
  std::size_t users_ = 0;
};

// Merges every input address of `tx` into one user. Returns the number of merges.
inline std::size_t apply_multi_input(UserPartition& partition, const TransactionRecord& tx) {
  if (tx.inputs.empty()) return 0;
  const AddressId first = partition.intern(tx.inputs.front().address);
  std::size_t merges = 0;
  for (std::size_t i = 1; i < tx.inputs.size(); ++i)
    merges += partition.unite(first, partition.intern(tx.inputs[i].address));
  return merges;
}

// Change-address rule. An output qualifies when its address has not been seen
// in any earlier transaction, is not one of this transaction's inputs, and its
// amount is strictly below every input amount. The single qualifying output is
// merged with the first input's user; zero or several qualifying outputs merge
// nothing. Must be called before the transaction's addresses are marked seen.
inline bool apply_change_address(UserPartition& partition, const TransactionRecord& tx) {
  if (tx.inputs.empty()) return false;
  Amount min_input = tx.inputs.front().amount;
  for (const auto& in : tx.inputs) min_input = std::min(min_input, in.amount);

  std::optional<AddressId> candidate;
  for (const auto& out : tx.outputs) {
    if (std::any_of(tx.inputs.begin(), tx.inputs.end(),
                    [&](const TxOutput& in) { return in.address == out.address; }))
      continue;
    const AddressId a = partition.intern(out.address);
    if (partition.seen(a) || out.amount >= min_input) continue;
    if (candidate && *candidate != a) return false;  // ambiguous
    candidate = a;
  }
  if (!candidate) return false;
  return partition.unite(partition.intern(tx.inputs.front().address), *candidate);
}

struct Heuristics {
  bool multi_input = true;
  bool change_address = true;
};

// Applies the enabled heuristics to one transaction and then marks all of its
// addresses as seen. Transactions must be fed in chronological order.
inline void process_transaction(UserPartition& partition, const TransactionRecord& tx,
                                Heuristics h = {}) {
  for (const auto& leg : tx.inputs) partition.intern(leg.address);
  for (const auto& leg : tx.outputs) partition.intern(leg.address);
  if (h.multi_input) apply_multi_input(partition, tx);
  if (h.change_address) apply_change_address(partition, tx);
  for (const auto& leg : tx.inputs) partition.mark_seen(partition.intern(leg.address));
  for (const auto& leg : tx.outputs) partition.mark_seen(partition.intern(leg.address));
}

// Directed, unweighted user network for one window. Node i stands for user
// users[i]; users is sorted ascending.
struct UserGraph {
  Digraph graph;
  std::vector<UserId> users;
  TimeWindow window;
};

// Node set: users touched by the window's transactions. Edge u->v iff some
// transaction spends from an address of u to an address of v, u != v.
inline UserGraph build_user_graph(std::span<const TransactionRecord> records,
                                  const UserPartition& partition, TimeWindow window = {}) {
  std::vector<UserId> users;
  auto user = [&](const std::string& address) {
    auto u = partition.user_of(address);
    if (!u) throw ContractError("address '" + address + "' missing from partition");
    return *u;
  };
  for (const auto& tx : records) {
    for (const auto& leg : tx.inputs) users.push_back(user(leg.address));
    for (const auto& leg : tx.outputs) users.push_back(user(leg.address));
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  auto local = [&](UserId u) {
    return static_cast<NodeId>(std::lower_bound(users.begin(), users.end(), u) - users.begin());
  };
  std::vector<Edge> edges;
  for (const auto& tx : records) {
    std::vector<NodeId> src;
    std::vector<NodeId> dst;
    for (const auto& leg : tx.inputs) src.push_back(local(user(leg.address)));
    for (const auto& leg : tx.outputs) dst.push_back(local(user(leg.address)));
    std::sort(src.begin(), src.end());
    src.erase(std::unique(src.begin(), src.end()), src.end());
    std::sort(dst.begin(), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    for (NodeId s : src)
      for (NodeId d : dst)
        if (s != d) edges.push_back({s, d});
  }
  UserGraph out;
  out.graph = Digraph(users.size(), std::move(edges));
  out.users = std::move(users);
  out.window = window;
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list text format: "N\nM\n" followed by M lines "u v" (0-based ids).

inline void write_edge_list(const Digraph& g, std::ostream& out) {
  out << g.node_count() << '\n' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) out << e.from << ' ' << e.to << '\n';
}

inline Digraph read_edge_list(std::istream& in) {
  std::size_t n = 0;
  std::size_t m = 0;
  if (!(in >> n >> m)) throw ParseError(1, "edge list must start with node and edge counts");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    if (!(in >> u >> v)) throw ParseError(3 + i, "expected 'u v'");
    if (u >= n || v >= n) throw ParseError(3 + i, "node id out of range");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  Digraph g(n, std::move(edges));
  if (g.edge_count() != m) throw ValidationError("edge list contains self-loops or duplicates");
  return g;
}

// Sidecar mapping node id -> user id -> member addresses.
inline nlohmann::json user_sidecar(const UserGraph& ug, const UserPartition& partition) {
  const auto members = partition.members();
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < ug.users.size(); ++i) {
    nodes.push_back({{"node", i}, {"user", ug.users[i]}, {"addresses", members.at(ug.users[i])}});
  }
  return {{"window_start", ug.window.start}, {"window_end", ug.window.end}, {"nodes", nodes}};
}

}  // namespace bunmeso
