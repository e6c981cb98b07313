#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bunmeso/error.hpp"
#include "bunmeso/rng.hpp"

namespace bunmeso {

using Timestamp = std::int64_t;  // seconds since the Unix epoch, UTC
using Amount = std::int64_t;     // integer base units

struct TxOutput {
  std::string address;
  Amount amount = 0;

  bool operator==(const TxOutput&) const = default;
};

struct TransactionRecord {
  std::string tx_id;
  Timestamp timestamp = 0;
  std::vector<TxOutput> inputs;  // empty for coinbase transactions
  std::vector<TxOutput> outputs;

  bool is_coinbase() const noexcept { return inputs.empty(); }
  bool operator==(const TransactionRecord&) const = default;
};

inline bool chronological_less(const TransactionRecord& a, const TransactionRecord& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.tx_id < b.tx_id;
}

enum class TransactionFormat { csv };

inline constexpr std::string_view kCsvHeader = "tx_id,timestamp,inputs,outputs";

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(s.substr(pos));
      return parts;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

inline std::vector<TxOutput> parse_legs(std::string_view field, std::size_t line,
                                        const char* what) {
  std::vector<TxOutput> legs;
  if (field.empty()) return legs;
  for (std::string_view item : split(field, ';')) {
    const std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos)
      throw ParseError(line, std::string(what) + " entry '" + std::string(item) +
                                 "' is not addr:amount");
    const std::string_view addr = item.substr(0, colon);
    const std::string_view amount = item.substr(colon + 1);
    if (addr.empty())
      throw ValidationError("line " + std::to_string(line) + ": empty address in " + what);
    Amount value = 0;
    if (!parse_int(amount, value))
      throw ParseError(line, std::string(what) + " amount '" + std::string(amount) +
                                 "' is not an integer");
    if (value < 0)
      throw ValidationError("line " + std::to_string(line) + ": negative amount " +
                            std::to_string(value) + " in " + what);
    legs.push_back({std::string(addr), value});
  }
  return legs;
}

}  // namespace detail

// Reads transaction records. A zero-byte source yields no records; anything
// else must start with the header line. Output is sorted by (timestamp, tx_id).
inline std::vector<TransactionRecord> parse_transactions(
    std::istream& source, TransactionFormat format = TransactionFormat::csv) {
  if (format != TransactionFormat::csv) throw ParameterError("unsupported transaction format");
  std::vector<TransactionRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(source, raw)) {
    ++line;
    std::string_view text(raw);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (line == 1) {
      if (text != kCsvHeader)
        throw ParseError(line, "expected header '" + std::string(kCsvHeader) + "'");
      continue;
    }
    if (text.empty()) throw ParseError(line, "empty line");
    const auto fields = detail::split(text, ',');
    if (fields.size() != 4)
      throw ParseError(line, "expected 4 comma-separated fields, got " +
                                 std::to_string(fields.size()));
    TransactionRecord rec;
    if (fields[0].empty()) throw ParseError(line, "empty tx_id");
    rec.tx_id = std::string(fields[0]);
    if (!detail::parse_int(fields[1], rec.timestamp))
      throw ParseError(line, "timestamp '" + std::string(fields[1]) + "' is not an integer");
    rec.inputs = detail::parse_legs(fields[2], line, "inputs");
    rec.outputs = detail::parse_legs(fields[3], line, "outputs");
    if (rec.outputs.empty())
      throw ValidationError("line " + std::to_string(line) + ": transaction has no outputs");
    if (!seen.emplace(rec.tx_id, line).second) throw DuplicateError(line, rec.tx_id);
    records.push_back(std::move(rec));
  }
  std::stable_sort(records.begin(), records.end(), chronological_less);
  return records;
}

// Canonical CSV form: header, then one line per record in the given order.
inline void serialize_transactions(std::span<const TransactionRecord> records, std::ostream& out) {
  auto write_legs = [&](const std::vector<TxOutput>& legs) {
    for (std::size_t i = 0; i < legs.size(); ++i) {
      if (i) out << ';';
      out << legs[i].address << ':' << legs[i].amount;
    }
  };
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.tx_id << ',' << r.timestamp << ',';
    write_legs(r.inputs);
    out << ',';
    write_legs(r.outputs);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Time windows

enum class Granularity { daily, weekly };

inline constexpr Timestamp kSecondsPerDay = 86400;
// 2009-01-01T00:00:00Z, a Thursday.
inline constexpr Timestamp kDefaultEpoch = 1230768000;

inline Timestamp window_length(Granularity g) {
  return g == Granularity::daily ? kSecondsPerDay : 7 * kSecondsPerDay;
}

inline const char* to_string(Granularity g) { return g == Granularity::daily ? "daily" : "weekly"; }

struct TimeWindow {
  Timestamp start = 0;  // inclusive
  Timestamp end = 0;    // exclusive
  Granularity granularity = Granularity::weekly;

  bool contains(Timestamp t) const noexcept { return t >= start && t < end; }
  bool operator==(const TimeWindow&) const = default;
};

struct WindowSlice {
  TimeWindow window;
  std::span<const TransactionRecord> records;
};

inline Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Start of the window containing t.
inline Timestamp window_start(Timestamp t, Granularity g, Timestamp epoch = kDefaultEpoch) {
  const Timestamp len = window_length(g);
  return epoch + floor_div(t - epoch, len) * len;
}

// Contiguous windows from the first to the last populated one. Empty windows
// in between are emitted with empty slices.
inline std::vector<WindowSlice> window_iter(std::span<const TransactionRecord> records,
                                            Granularity granularity,
                                            Timestamp epoch = kDefaultEpoch) {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (chronological_less(records[i], records[i - 1]))
      throw ContractError("window_iter requires records sorted by (timestamp, tx_id); record " +
                          std::to_string(i) + " is out of order");
  std::vector<WindowSlice> windows;
  if (records.empty()) return windows;
  const Timestamp len = window_length(granularity);
  Timestamp start = window_start(records.front().timestamp, granularity, epoch);
  const Timestamp last = window_start(records.back().timestamp, granularity, epoch);
  std::size_t pos = 0;
  for (; start <= last; start += len) {
    const TimeWindow w{start, start + len, granularity};
    std::size_t stop = pos;
    while (stop < records.size() && records[stop].timestamp < w.end) ++stop;
    windows.push_back({w, records.subspan(pos, stop - pos)});
    pos = stop;
  }
  return windows;
}

// ---------------------------------------------------------------------------
// Synthetic fixture chain

struct SynthParams {
  std::uint64_t seed = 1;
  std::size_t n_tx = 1000;
  std::size_t n_addr = 400;         // initial address pool
  Timestamp start = 1356998400;     // 2013-01-01T00:00:00Z
  Timestamp span = 70 * kSecondsPerDay;
  double p_multi_input = 0.35;      // spend from 2-3 addresses
  double p_change = 0.6;            // add a fresh, small change output
  double p_coinbase = 0.03;
  double p_fresh_recipient = 0.15;  // pay to a never-used address of the recipient
  double p_skewed_sender = 0.5;     // sender drawn from the same skew as recipients
  std::size_t owners = 0;           // hidden owners; 0 = n_addr / 3
};

// Deterministic chain exercising both clustering heuristics: multi-input
// spends and change outputs that are new and smaller than every input.
// Recipients are drawn with a skew so that hubs emerge.
inline std::vector<TransactionRecord> generate_synthetic_chain(const SynthParams& p) {
  if (p.n_tx == 0) throw ParameterError("n_tx must be > 0");
  if (p.n_addr == 0) throw ParameterError("n_addr must be > 0");
  if (p.span <= 0) throw ParameterError("span must be > 0");
  const std::size_t owners = p.owners ? p.owners : std::max<std::size_t>(2, p.n_addr / 3);
  if (owners < 2) throw ParameterError("need at least two owners");

  Rng rng(p.seed);
  std::vector<std::vector<std::string>> wallet(owners);
  std::size_t next_addr = 0;
  auto fresh_address = [&](std::size_t owner) {
    wallet[owner].push_back("a" + std::to_string(next_addr++));
    return wallet[owner].back();
  };
  for (std::size_t o = 0; o < owners; ++o) fresh_address(o);
  while (next_addr < p.n_addr) fresh_address(rng.below(owners));

  auto skewed_owner = [&]() {
    const double u = rng.uniform();
    return std::min<std::size_t>(owners - 1, static_cast<std::size_t>(u * u * u * owners));
  };

  std::vector<Timestamp> times(p.n_tx);
  for (auto& t : times) t = p.start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(p.span)));
  std::sort(times.begin(), times.end());

  std::vector<TransactionRecord> chain;
  chain.reserve(p.n_tx);
  const int width = static_cast<int>(std::to_string(p.n_tx).size());
  for (std::size_t k = 0; k < p.n_tx; ++k) {
    TransactionRecord tx;
    std::string id = std::to_string(k);
    tx.tx_id = "tx" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    tx.timestamp = times[k];

    if (rng.bernoulli(p.p_coinbase)) {
      const std::size_t miner = rng.below(owners);
      tx.outputs.push_back({fresh_address(miner), 5000000000LL});
      chain.push_back(std::move(tx));
      continue;
    }

    const std::size_t sender = rng.bernoulli(p.p_skewed_sender) ? skewed_owner() : rng.below(owners);
    auto& pool = wallet[sender];
    std::size_t n_in = 1;
    if (rng.bernoulli(p.p_multi_input)) n_in = 2 + rng.below(2);
    n_in = std::min(n_in, pool.size());
    // Distinct input addresses from the sender's wallet.
    std::vector<std::size_t> picks;
    while (picks.size() < n_in) {
      const std::size_t idx = rng.below(pool.size());
      if (std::find(picks.begin(), picks.end(), idx) == picks.end()) picks.push_back(idx);
    }
    Amount total = 0;
    Amount smallest = 0;
    for (std::size_t idx : picks) {
      const Amount a = rng.between(10000, 1000000);
      tx.inputs.push_back({pool[idx], a});
      total += a;
      smallest = (smallest == 0) ? a : std::min(smallest, a);
    }

    std::size_t recipient = skewed_owner();
    if (recipient == sender) recipient = (recipient + 1) % owners;
    const std::string to = rng.bernoulli(p.p_fresh_recipient)
                               ? fresh_address(recipient)
                               : wallet[recipient][rng.below(wallet[recipient].size())];
    Amount change = 0;
    const bool with_change = rng.bernoulli(p.p_change) && smallest > 1;
    if (with_change) change = rng.between(1, smallest - 1);
    const Amount fee = rng.between(0, 500);
    tx.outputs.push_back({to, std::max<Amount>(1, total - change - fee)});
    if (with_change) tx.outputs.push_back({fresh_address(sender), change});
    chain.push_back(std::move(tx));
  }
  return chain;
}

}  // namespace bunmeso
