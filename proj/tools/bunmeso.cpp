// bunmeso command-line driver.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bunmeso/pipeline.hpp"

namespace {

using namespace bunmeso;

struct CommonFlags {
  std::string config;
  std::vector<std::string> inputs;
  std::string output;
  std::string granularity;
  std::vector<std::string> settings;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "key=value config file (default: $BUNMESO_CONFIG)");
  cmd->add_option("-i,--input", f.inputs, "input transaction file(s)");
  cmd->add_option("-o,--output", f.output, "output path");
  cmd->add_option("-s,--set", f.settings, "override one config key, key=value");
}

RunConfig resolve(const CommonFlags& f, CLI::App* cmd) {
  RunConfig cfg;
  std::string path = f.config;
  if (path.empty())
    if (const char* env = std::getenv(std::string(kConfigEnv).c_str())) path = env;
  if (!path.empty()) load_config_file(cfg, path);
  for (const auto& kv : f.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, detail::trim(std::string_view(kv).substr(0, eq)),
                  detail::trim(std::string_view(kv).substr(eq + 1)));
  }
  if (!f.inputs.empty()) cfg.inputs = f.inputs;
  if (!f.output.empty()) cfg.output = f.output;
  if (!f.granularity.empty()) apply_setting(cfg, "granularity", f.granularity);
  auto given = [&](const char* name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--workers")) apply_setting(cfg, "workers", std::to_string(f.workers));
  return cfg;
}

std::vector<ToyModelParams> parse_grid(const std::vector<std::string>& cells,
                                       const std::vector<std::uint32_t>& hubs,
                                       const std::vector<std::uint32_t>& leaves) {
  std::vector<ToyModelParams> grid;
  for (const auto& cell : cells) {
    const auto colon = cell.find(':');
    if (colon == std::string::npos) throw ParameterError("grid cell must be hubs:leaves, got '" + cell + "'");
    grid.push_back({detail::parse_integer<std::uint32_t>("hubs", cell.substr(0, colon)),
                    detail::parse_integer<std::uint32_t>("leaves", cell.substr(colon + 1))});
  }
  for (auto h : hubs)
    for (auto l : leaves) grid.push_back({h, l});
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal user-network mesoscale analysis of transaction records"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "validate and canonicalize transaction CSV files");
  add_common(ingest, ingest_flags);

  CommonFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "per-window analysis, series and manifest");
  add_common(analyze, analyze_flags);
  analyze->add_option("-g,--granularity", analyze_flags.granularity, "daily or weekly");
  analyze->add_option("--seed", analyze_flags.seed, "seed for stochastic steps");
  analyze->add_option("-j,--workers", analyze_flags.workers, "concurrent windows");

  std::vector<std::string> cells;
  std::vector<std::uint32_t> hubs, leaves;
  auto* toyscan = app.add_subcommand("toyscan", "hub-and-leaves toy model: closed form vs measured");
  toyscan->add_option("--cell", cells, "grid cell hubs:leaves (repeatable)");
  toyscan->add_option("--hubs", hubs, "hub counts (crossed with --leaves)")->delimiter(',');
  toyscan->add_option("--leaves", leaves, "leaves per hub (crossed with --hubs)")->delimiter(',');

  SynthParams sp;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic transaction fixture");
  synth->add_option("-o,--output", synth_out, "output CSV")->required();
  synth->add_option("--seed", sp.seed, "generator seed");
  synth->add_option("--n-tx", sp.n_tx, "number of transactions");
  synth->add_option("--n-addr", sp.n_addr, "initial address pool");
  synth->add_option("--owners", sp.owners, "hidden owners (0: n-addr/3)");
  synth->add_option("--start", sp.start, "first timestamp (unix seconds)");
  synth->add_option("--span-days", sp.span, "time span in days")
      ->transform([](std::string v) { return std::to_string(std::stoll(v) * kSecondsPerDay); });
  synth->add_option("--p-multi-input", sp.p_multi_input)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--p-change", sp.p_change)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--p-coinbase", sp.p_coinbase)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--p-fresh-recipient", sp.p_fresh_recipient)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--p-skewed-sender", sp.p_skewed_sender)->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*ingest) {
      RunConfig cfg = resolve(ingest_flags, ingest);
      if (ingest_flags.output.empty()) throw ParameterError("ingest needs --output");
      return cmd_ingest(cfg);
    }
    if (*analyze) return cmd_analyze(resolve(analyze_flags, analyze));
    if (*toyscan) {
      auto grid = parse_grid(cells, hubs, leaves);
      if (grid.empty()) grid.push_back({100, 100});
      return cmd_toyscan(grid);
    }
    if (*synth) return cmd_synth(sp, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "bunmeso: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
