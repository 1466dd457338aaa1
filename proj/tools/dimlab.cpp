// Command-line driver for the dimension experiments.
//
// Exit status: 0 when every result row passes, 1 when any fails, 2 on a
// usage, configuration or module error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dimlab/experiments.hpp"

namespace {

struct Command {
  const char* name;
  const char* help;
  std::vector<std::string> flags;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"estimate", "packing-count dimension estimate of a space (optionally times [0,1]^d)",
       {"space", "variant", "n", "d", "seed", "plot"}},
      {"cantor", "exact mesh counts of the digit-function graphs and their slopes", {"n-max", "n", "seed", "plot"}},
      {"prevalence", "fraction of sampled witnesses satisfying the packing event",
       {"space", "d", "n", "trials", "seed", "drift"}},
      {"statement31", "failure probability of the translated packing union", {"space", "d", "n", "trials", "seed", "adversary"}},
      {"energy", "energy-dimension profile or the nested-family expectation checks",
       {"space", "check", "n", "depth", "t", "s", "d", "trials", "seed", "drift"}},
      {"lemma52", "double-integral ratio sweep", {"d", "u", "sweep", "trials", "seed"}},
      {"report", "every acceptance criterion in one table", {"seed"}},
  };
  return list;
}

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help{
      {"space", "interval | cantor | harmonic"},
      {"variant", "liminf | limsup | full-fit"},
      {"n", "scale range lo..hi (or a single index)"},
      {"n-max", "largest n for exact counts"},
      {"d", "cube / value dimension"},
      {"u", "integral exponent (must exceed d/2)"},
      {"sweep", "all | p | q | theta"},
      {"trials", "Monte Carlo trials (or Sobol points for lemma52 --d 2)"},
      {"seed", "base seed"},
      {"check", "profile | statement55"},
      {"drift", "zero | f | both"},
      {"adversary", "zero | colliding | both"},
      {"depth", "nested-family depth (1..4)"},
      {"t", "energy exponent t"},
      {"s", "energy exponent s (t < s)"},
      {"plot", "write plot data to this path"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimlab: dimension estimators, exact Cantor counts and random-function checks"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;
  app.add_option("--config", config_path, "file of key = value settings; flags override it");

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    sub->add_option("--config", config_path, "file of key = value settings; flags override it");
    sub->add_option("--out", out_path, "write CSV here instead of standard output");
    for (const auto& f : cmd.flags)
      options[cmd.name][f] = sub->add_option("--" + f, given[cmd.name][f], flag_help().at(f));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  dimlab::ExperimentConfig config;
  try {
    std::string name;
    for (const auto& [n, sub] : subs)
      if (sub->parsed()) name = n;
    config.command = name;
    if (!config_path.empty())
      for (const auto& [key, value] : dimlab::read_config_file(config_path)) dimlab::apply_setting(config, key, value);
    for (const auto& [flag, opt] : options[name])
      if (opt->count() > 0) dimlab::apply_setting(config, flag, given[name][flag]);
    if (!out_path.empty()) config.out = out_path;
    config.command = name;
    config.validate();
  } catch (const dimlab::Error& e) {
    std::cerr << "dimlab: " << e.what() << "\n";
    return 2;
  }

  try {
    const dimlab::ResultTable table = dimlab::run(config);
    if (config.out.empty()) {
      std::cout << dimlab::to_csv(table);
    } else {
      dimlab::emit_csv(table, config.out);
      std::size_t failed = 0;
      for (const auto& r : table.rows) failed += r.pass ? 0 : 1;
      std::cerr << config.out << ": " << table.rows.size() << " rows, " << failed << " failing (seed " << config.seed << ")\n";
    }
    if (!config.plot.empty()) dimlab::emit_plotdata(table, config.plot);
    return table.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "dimlab: " << e.what() << "\n";
    return 2;
  }
}
