#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bunmeso/error.hpp"
#include "bunmeso/graphcore.hpp"
#include "bunmeso/ingest.hpp"
#include "bunmeso/metrics.hpp"
#include "bunmeso/nullmodels.hpp"

namespace bunmeso {

// ---------------------------------------------------------------------------
// Temporal z-score z = (X_t - mean) / s over a trailing window.

struct SeriesPoint {
  Timestamp time = 0;
  std::optional<double> value;
};

enum class ZFlag : std::uint8_t { ok, underfilled, zero_variance, missing };

inline constexpr std::string_view to_string(ZFlag f) {
  switch (f) {
    case ZFlag::ok: return "ok";
    case ZFlag::underfilled: return "underfilled";
    case ZFlag::zero_variance: return "zero_variance";
    case ZFlag::missing: return "missing";
  }
  return "?";
}

struct TemporalZScore {
  std::string quantity;
  Timestamp time = 0;
  std::optional<double> value;
  std::optional<double> mean;
  std::optional<double> sd;  // population standard deviation
  std::optional<double> z;
  ZFlag flag = ZFlag::underfilled;
};

inline constexpr std::size_t kSixMonthsWeekly = 26;
inline constexpr std::size_t kSixMonthsDaily = 182;

struct TemporalZOptions {
  std::size_t window_len = kSixMonthsWeekly;
  // When set, the window is the window_len values ending at t instead of the
  // window_len values strictly before t.
  bool include_current = false;
};

// A point gets a numeric z only when all window_len window values are present
// and their spread is non-zero.
inline std::vector<TemporalZScore> temporal_zscore(std::span<const SeriesPoint> series,
                                                   const TemporalZOptions& opt = {},
                                                   std::string_view quantity = {}) {
  if (opt.window_len == 0) throw ParameterError("window_len must be > 0");
  if (series.size() >= 2) {
    const Timestamp step = series[1].time - series[0].time;
    if (step <= 0) throw ContractError("series must be strictly increasing in time");
    for (std::size_t i = 2; i < series.size(); ++i)
      if (series[i].time - series[i - 1].time != step)
        throw ContractError("series spacing is not uniform at index " + std::to_string(i));
  }
  std::vector<TemporalZScore> out;
  out.reserve(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    TemporalZScore z;
    z.quantity = std::string(quantity);
    z.time = series[t].time;
    z.value = series[t].value;
    const std::size_t needed = opt.include_current ? opt.window_len - 1 : opt.window_len;
    if (!z.value) {
      z.flag = ZFlag::missing;
    } else if (t < needed) {
      z.flag = ZFlag::underfilled;
    } else {
      const std::size_t end = opt.include_current ? t + 1 : t;
      const std::size_t begin = end - opt.window_len;
      bool complete = true;
      long double sum = 0;
      for (std::size_t k = begin; k < end; ++k) {
        if (!series[k].value) {
          complete = false;
          break;
        }
        sum += *series[k].value;
      }
      if (!complete) {
        z.flag = ZFlag::underfilled;
      } else {
        const long double mean = sum / opt.window_len;
        long double sq = 0;
        for (std::size_t k = begin; k < end; ++k) {
          const long double d = *series[k].value - mean;
          sq += d * d;
        }
        const long double sd = std::sqrt(sq / opt.window_len);
        z.mean = static_cast<double>(mean);
        z.sd = static_cast<double>(sd);
        if (sd == 0) {
          z.flag = ZFlag::zero_variance;
        } else {
          z.z = static_cast<double>((*z.value - mean) / sd);
          z.flag = ZFlag::ok;
        }
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Price-bubble periods used to annotate series.

struct BubbleWindow {
  int index = 0;
  std::chrono::year_month_day start;
  std::chrono::year_month_day end;  // inclusive
  int days = 0;                     // duration as tabulated by the source
};

inline const std::array<BubbleWindow, 4>& builtin_bubbles() {
  using namespace std::chrono;
  static const std::array<BubbleWindow, 4> table = {{
      {1, year{2012} / May / 25, year{2012} / August / 18, 84},
      {2, year{2013} / January / 3, year{2013} / April / 11, 98},
      {3, year{2013} / October / 7, year{2013} / November / 23, 47},
      {4, year{2017} / March / 31, year{2017} / December / 18, 155},
  }};
  return table;
}

inline std::chrono::sys_days day_of(Timestamp t) {
  return std::chrono::sys_days{std::chrono::days{floor_div(t, kSecondsPerDay)}};
}

inline std::string format_date(Timestamp t) {
  const std::chrono::year_month_day d{day_of(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()),
                unsigned(d.day()));
  return buf;
}

// Index of the bubble whose [start, end] contains the day of `window_start`.
inline std::optional<int> bubble_of(Timestamp window_start,
                                    std::span<const BubbleWindow> bubbles = builtin_bubbles()) {
  const auto day = day_of(window_start);
  for (const auto& b : bubbles)
    if (day >= std::chrono::sys_days{b.start} && day <= std::chrono::sys_days{b.end}) return b.index;
  return std::nullopt;
}

inline std::vector<std::optional<int>> annotate_bubbles(
    std::span<const Timestamp> window_starts,
    std::span<const BubbleWindow> bubbles = builtin_bubbles()) {
  std::vector<std::optional<int>> out;
  out.reserve(window_starts.size());
  for (Timestamp t : window_starts) out.push_back(bubble_of(t, bubbles));
  return out;
}

// ---------------------------------------------------------------------------
// Per-snapshot report and cross-snapshot series.

enum class WindowStatus : std::uint8_t { ok, flagged, failed };

inline constexpr std::string_view to_string(WindowStatus s) {
  switch (s) {
    case WindowStatus::ok: return "ok";
    case WindowStatus::flagged: return "flagged";
    case WindowStatus::failed: return "failed";
  }
  return "?";
}

struct CoreSummary {
  double core_fraction = 0;
  std::size_t core_size = 0;
  std::size_t periphery_size = 0;
  std::uint64_t core_links = 0;
  std::uint64_t periphery_links = 0;
  double pvalue = 1;
  double log_surprise = 0;
  bool significant = false;
  bool degenerate = false;
};

struct DbcmSummary {
  double residual = 0;
  std::size_t iterations = 0;
  bool near_deterministic = false;
};

struct CentralitySummary {
  std::size_t component_size = 0;
  std::array<std::optional<double>, 4> gini{};            // by Centrality
  std::array<std::optional<double>, 4> centralization{};  // by Centrality
};

struct SnapshotReport {
  std::size_t index = 0;
  TimeWindow window;
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  WindowStatus status = WindowStatus::ok;
  std::vector<std::string> flags;

  std::optional<ComponentCensus> components;
  std::optional<BowTiePartition> bowtie;
  std::optional<CoreSummary> core;
  DyadCensus dyads;
  std::optional<DbcmSummary> dbcm;
  std::optional<std::array<NullModelZScore, 3>> dyad_z;
  std::optional<AssortativityReport> assortativity;
  std::optional<double> reciprocity;
  std::optional<CentralitySummary> centrality;
  std::optional<SmallWorldReport> small_world;
};

// Scalar quantities addressable by name for series building.
inline const std::vector<std::string>& series_quantity_names() {
  static const std::vector<std::string> names = {
      "n_nodes",          "n_edges",          "frac_largest_wcc",      "frac_largest_scc",
      "core_fraction",    "core_links",       "periphery_links",       "surprise_log",
      "reciprocity",      "dyads_empty",      "dyads_single",          "dyads_reciprocated",
      "z_empty",          "z_single",         "z_reciprocated",        "assortativity_und",
      "assortativity_out_in", "assortativity_out_out", "assortativity_in_in", "assortativity_in_out",
      "gini_degree",      "gini_closeness",   "gini_betweenness",      "gini_eigenvector",
      "centralization_degree", "centralization_closeness", "centralization_betweenness",
      "centralization_eigenvector", "apl", "clustering", "er_clustering"};
  return names;
}

inline std::optional<double> report_quantity(const SnapshotReport& r, std::string_view name) {
  auto opt = [](auto&& o, auto&& f) -> std::optional<double> {
    if (!o) return std::nullopt;
    return f(*o);
  };
  if (name == "n_nodes") return double(r.n_nodes);
  if (name == "n_edges") return double(r.n_edges);
  if (name == "frac_largest_wcc") return opt(r.components, [](auto& c) { return c.frac_largest_wcc; });
  if (name == "frac_largest_scc") return opt(r.components, [](auto& c) { return c.frac_largest_scc; });
  if (name == "core_fraction") return opt(r.core, [](auto& c) { return c.core_fraction; });
  if (name == "core_links") return opt(r.core, [](auto& c) { return double(c.core_links); });
  if (name == "periphery_links") return opt(r.core, [](auto& c) { return double(c.periphery_links); });
  if (name == "surprise_log") return opt(r.core, [](auto& c) { return c.log_surprise; });
  if (name == "reciprocity") return r.reciprocity;
  if (name == "dyads_empty") return double(r.dyads.empty);
  if (name == "dyads_single") return double(r.dyads.single);
  if (name == "dyads_reciprocated") return double(r.dyads.reciprocated);
  for (Motif m : kMotifs)
    if (name == "z_" + std::string(to_string(m))) {
      if (!r.dyad_z) return std::nullopt;
      return (*r.dyad_z)[static_cast<std::size_t>(m)].z;
    }
  if (r.assortativity || name.starts_with("assortativity_")) {
    if (name == "assortativity_und") return r.assortativity ? r.assortativity->r_und : std::nullopt;
    if (name == "assortativity_out_in") return r.assortativity ? r.assortativity->out_in : std::nullopt;
    if (name == "assortativity_out_out") return r.assortativity ? r.assortativity->out_out : std::nullopt;
    if (name == "assortativity_in_in") return r.assortativity ? r.assortativity->in_in : std::nullopt;
    if (name == "assortativity_in_out") return r.assortativity ? r.assortativity->in_out : std::nullopt;
  }
  for (Centrality c : kCentralities) {
    const auto i = static_cast<std::size_t>(c);
    if (name == "gini_" + std::string(to_string(c)))
      return r.centrality ? r.centrality->gini[i] : std::nullopt;
    if (name == "centralization_" + std::string(to_string(c)))
      return r.centrality ? r.centrality->centralization[i] : std::nullopt;
  }
  if (name == "apl") return opt(r.small_world, [](auto& s) { return s.apl; });
  if (name == "clustering") return opt(r.small_world, [](auto& s) { return s.clustering; });
  if (name == "er_clustering") return opt(r.small_world, [](auto& s) { return s.er_clustering; });
  throw ParameterError("unknown series quantity '" + std::string(name) + "'");
}

inline const std::vector<std::string>& default_series_quantities() {
  static const std::vector<std::string> q = {"core_fraction", "periphery_links", "reciprocity"};
  return q;
}

struct SeriesReport {
  Granularity granularity = Granularity::weekly;
  TemporalZOptions z_options;
  std::vector<std::size_t> indices;
  std::vector<Timestamp> starts;
  std::vector<std::optional<int>> bubble;
  std::vector<std::string> quantities;
  std::vector<std::vector<TemporalZScore>> z;  // one row per quantity
};

inline SeriesReport build_series(std::span<const SnapshotReport> reports,
                                 std::span<const std::string> quantities,
                                 TemporalZOptions opt,
                                 std::span<const BubbleWindow> bubbles = builtin_bubbles()) {
  SeriesReport s;
  s.z_options = opt;
  if (!reports.empty()) s.granularity = reports.front().window.granularity;
  for (const auto& r : reports) {
    if (r.window.granularity != s.granularity)
      throw ContractError("reports mix daily and weekly windows");
    s.indices.push_back(r.index);
    s.starts.push_back(r.window.start);
  }
  s.bubble = annotate_bubbles(s.starts, bubbles);
  for (const auto& q : quantities) {
    std::vector<SeriesPoint> pts;
    pts.reserve(reports.size());
    for (const auto& r : reports) pts.push_back({r.window.start, report_quantity(r, q)});
    s.quantities.push_back(q);
    s.z.push_back(temporal_zscore(pts, opt, q));
  }
  return s;
}

inline SeriesReport build_series(std::span<const SnapshotReport> reports) {
  TemporalZOptions opt;
  if (!reports.empty() && reports.front().window.granularity == Granularity::daily)
    opt.window_len = kSixMonthsDaily;
  return build_series(reports, default_series_quantities(), opt);
}

}  // namespace bunmeso
