#include <iostream>

#include "CLI11.hpp"
#include "polymer/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Directed polymer simulator and verification suite", "polymer-lab"};
  app.require_subcommand(1, 1);
  polymer::CliOptions opt;
  const std::pair<const char*, const char*> subs[] = {
      {"kernel", "Build or load kernel tables and run the kernel diagnostics"},
      {"identity", "Chaos/transfer-matrix equivalence, decomposition reassembly, second moments"},
      {"experiment", "Monte-Carlo scans: factorization, convergence, correlations"},
      {"report", "Merge result CSVs into summary.json"},
  };
  for (const auto& [name, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Configuration file (INI)")->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--workers", opt.workers, "Worker threads (overrides run.workers)")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opt.quiet, "Only write files");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return polymer::kExitUsage;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();
  return polymer::run_cli(opt);
}
