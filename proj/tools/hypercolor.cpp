#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "hypercolor/cli.hpp"

namespace cli = hypercolor::cli;

namespace {

const std::map<std::string, std::string> kDescriptions = {
    {"bounds", "classical and improved threshold bounds and the Hessian critical density"},
    {"rate", "entropy, energy and rate of an overlap matrix"},
    {"maximize", "multistart maximization of the rate over a domain of overlap matrices"},
    {"simulate-core", "sample planted instances and extract the rigid core"},
    {"simulate-cluster", "exact clusters of small planted instances against the core bound"},
    {"oracle-verify", "exact first moment against Monte-Carlo, optional Potts partition function"},
    {"condensation-scan", "condensation witness rows and the s-stable gap table"},
};

struct Flags {
  cli::RunConfig cfg;
  std::string config_path;
};

void add_common(CLI::App& sub, Flags& f) {
  auto& c = f.cfg;
  sub.add_option("--q", c.q, "number of colors");
  sub.add_option("--k", c.k, "edge size");
  sub.add_option("--c", c.c, "edge density m/n");
  sub.add_option("--n", c.n, "number of vertices");
  sub.add_option("--m", c.m, "number of edges");
  sub.add_option("--s", c.s, "stability index");
  sub.add_option("--beta", c.beta, "inverse temperature");
  sub.add_option("--seed", c.seed, "64-bit seed (default: $HYPERCOLOR_SEED or 1)");
  sub.add_option("--trials", c.trials, "independent trials");
  sub.add_option("--starts", c.starts, "maximizer multistarts");
  sub.add_option("--threads", c.threads, "worker threads (0: all cores)");
  sub.add_option("--matrix", c.matrix, "flat, identity, stable, s-stable or a JSON/CSV file");
  sub.add_option("--domain", c.domain, "D, S, tame or D_<s>");
  sub.add_option("--scale", c.scale, "divide core thresholds by this factor");
  sub.add_option("--gammas", c.gammas, "offsets below the upper bound");
  sub.add_flag("--members", c.members, "list set members in core reports");
  sub.add_option("--output,-o", c.output, "output path (default stdout)");
  sub.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub.add_option("--config", f.config_path, "JSON or flat TOML file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-moment toolkit for random hypergraph q-coloring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    subs[name] = sub;
  }
  // every subcommand binds the same fields; only one is ever parsed
  for (auto& [name, sub] : subs) add_common(*sub, flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  auto& cfg = flags.cfg;
  for (auto& [name, sub] : subs)
    if (sub->parsed()) cfg.command = name;

  std::set<std::string> given;
  for (auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    for (const auto* opt : sub->get_options())
      if (opt->count() > 0 && !opt->get_lnames().empty()) given.insert(opt->get_lnames().front());
  }
  given.insert("command");
  bool config_seed = false;
  try {
    if (!flags.config_path.empty()) {
      const auto config = cli::load_config_file(flags.config_path);
      config_seed = config.contains("seed");
      cli::apply_config(config, cfg, given);
    }
  } catch (const hypercolor::ParameterError& e) {
    std::cerr << e.what() << '\n';
    return cli::kUsage;
  }
  // precedence: flag, config file, environment, built-in default
  if (!given.count("seed") && !config_seed) {
    if (const char* env = std::getenv("HYPERCOLOR_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "HYPERCOLOR_SEED must be an unsigned integer\n";
        return cli::kUsage;
      }
    }
  }
  return cli::run(cfg, std::cout, std::cerr);
}
