#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bunmeso/timeseries.hpp"

namespace bunmeso {

inline constexpr int kReportSchemaVersion = 1;

namespace detail {

template <class T>
nlohmann::json nullable(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Shortest decimal that round-trips.
inline std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace detail

inline nlohmann::json window_json(const TimeWindow& w) {
  return {{"start", w.start},
          {"end", w.end},
          {"start_date", format_date(w.start)},
          {"granularity", to_string(w.granularity)}};
}

inline nlohmann::json to_json(const SnapshotReport& r) {
  using nlohmann::json;
  using detail::nullable;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["index"] = r.index;
  j["window"] = window_json(r.window);
  j["n_nodes"] = r.n_nodes;
  j["n_edges"] = r.n_edges;
  j["status"] = to_string(r.status);
  j["flags"] = r.flags;

  if (r.components) {
    const auto& c = *r.components;
    j["components"] = {{"n_wcc", c.n_wcc},
                       {"n_scc", c.n_scc},
                       {"largest_wcc", c.wcc_sizes.empty() ? 0 : c.wcc_sizes.front()},
                       {"largest_scc", c.scc_sizes.empty() ? 0 : c.scc_sizes.front()},
                       {"frac_largest_wcc", c.frac_largest_wcc},
                       {"frac_largest_scc", c.frac_largest_scc},
                       {"lcc_ratio_weak", nullable(c.lcc_ratio_weak)},
                       {"lcc_ratio_strong", nullable(c.lcc_ratio_strong)}};
  } else {
    j["components"] = nullptr;
  }

  if (r.bowtie) {
    json counts = json::object();
    json fractions = json::object();
    for (BowTieClass c : kBowTieClasses) {
      counts[std::string(to_string(c))] = r.bowtie->count(c);
      fractions[std::string(to_string(c))] = r.bowtie->fraction(c);
    }
    j["bowtie"] = {{"counts", counts}, {"fractions", fractions}};
  } else {
    j["bowtie"] = nullptr;
  }

  if (r.core) {
    const auto& c = *r.core;
    j["core_periphery"] = {{"core_fraction", c.core_fraction},
                           {"core_size", c.core_size},
                           {"periphery_size", c.periphery_size},
                           {"core_links", c.core_links},
                           {"periphery_links", c.periphery_links},
                           {"surprise_pvalue", c.pvalue},
                           {"log_surprise", c.log_surprise},
                           {"significant", c.significant},
                           {"degenerate", c.degenerate}};
  } else {
    j["core_periphery"] = nullptr;
  }

  j["dyads"] = {{"empty", r.dyads.empty},
                {"single", r.dyads.single},
                {"reciprocated", r.dyads.reciprocated}};

  if (r.dbcm) {
    j["dbcm"] = {{"residual", r.dbcm->residual},
                 {"iterations", r.dbcm->iterations},
                 {"near_deterministic", r.dbcm->near_deterministic}};
  } else {
    j["dbcm"] = nullptr;
  }
  if (r.dyad_z) {
    json z = json::object();
    for (const auto& m : *r.dyad_z)
      z[std::string(to_string(m.motif))] = {{"observed", m.observed},
                                            {"expected", m.expected},
                                            {"sd", m.sd},
                                            {"z", nullable(m.z)},
                                            {"significance", to_string(m.significance())}};
    j["dyad_zscores"] = z;
  } else {
    j["dyad_zscores"] = nullptr;
  }

  if (r.assortativity) {
    const auto& a = *r.assortativity;
    j["assortativity"] = {{"undirected", nullable(a.r_und)},
                          {"out_in", nullable(a.out_in)},
                          {"out_out", nullable(a.out_out)},
                          {"in_in", nullable(a.in_in)},
                          {"in_out", nullable(a.in_out)}};
  } else {
    j["assortativity"] = nullptr;
  }
  j["reciprocity"] = nullable(r.reciprocity);

  if (r.centrality) {
    json gini = json::object();
    json cz = json::object();
    for (Centrality c : kCentralities) {
      const auto i = static_cast<std::size_t>(c);
      gini[std::string(to_string(c))] = nullable(r.centrality->gini[i]);
      cz[std::string(to_string(c))] = nullable(r.centrality->centralization[i]);
    }
    j["centrality"] = {{"component_size", r.centrality->component_size},
                       {"gini", gini},
                       {"centralization", cz}};
  } else {
    j["centrality"] = nullptr;
  }

  if (r.small_world) {
    const auto& s = *r.small_world;
    j["small_world"] = {{"apl", s.apl},
                        {"clustering", s.clustering},
                        {"er_clustering", s.er_clustering},
                        {"component_nodes", s.n},
                        {"component_edges", s.m},
                        {"apl_mode", s.mode == AplMode::exact ? "exact" : "sampled"},
                        {"apl_sources", s.sources}};
  } else {
    j["small_world"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const SeriesReport& s) {
  using nlohmann::json;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["granularity"] = to_string(s.granularity);
  j["window_len"] = s.z_options.window_len;
  j["include_current"] = s.z_options.include_current;
  json points = json::array();
  for (std::size_t t = 0; t < s.starts.size(); ++t) {
    json p;
    p["index"] = s.indices[t];
    p["start"] = s.starts[t];
    p["start_date"] = format_date(s.starts[t]);
    p["bubble"] = detail::nullable(s.bubble[t]);
    json q = json::object();
    for (std::size_t k = 0; k < s.quantities.size(); ++k) {
      const auto& z = s.z[k][t];
      q[s.quantities[k]] = {{"value", detail::nullable(z.value)},
                            {"mean", detail::nullable(z.mean)},
                            {"sd", detail::nullable(z.sd)},
                            {"z", detail::nullable(z.z)},
                            {"flag", to_string(z.flag)}};
    }
    p["quantities"] = q;
    points.push_back(std::move(p));
  }
  j["points"] = points;
  return j;
}

// Flat series table: one row per window, five columns per quantity.
inline void write_series_csv(const SeriesReport& s, std::ostream& out) {
  out << "# bunmeso series schema " << kReportSchemaVersion << "; granularity "
      << to_string(s.granularity) << "; window_len " << s.z_options.window_len << '\n';
  out << "index,start,start_date,bubble";
  for (const auto& q : s.quantities)
    out << ',' << q << ',' << q << "_mean," << q << "_sd," << q << "_z," << q << "_flag";
  out << '\n';
  for (std::size_t t = 0; t < s.starts.size(); ++t) {
    out << s.indices[t] << ',' << s.starts[t] << ',' << format_date(s.starts[t]) << ',';
    if (s.bubble[t]) out << *s.bubble[t];
    for (std::size_t k = 0; k < s.quantities.size(); ++k) {
      const auto& z = s.z[k][t];
      out << ',' << detail::csv_cell(z.value) << ',' << detail::csv_cell(z.mean) << ','
          << detail::csv_cell(z.sd) << ',' << detail::csv_cell(z.z) << ',' << to_string(z.flag);
    }
    out << '\n';
  }
}

}  // namespace bunmeso
