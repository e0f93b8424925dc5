#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tkm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov-regularized Krasnosel'skii-Mann and forward-backward iterations"};
  app.require_subcommand(1);

  std::string config;
  tkm::CommandOptions opts;
  std::string dimension = "both";

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "configuration file")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_flag("--force", opts.force, "run even when schedule validation fails");
    sub->add_option("--grid-n", opts.grid_n, "quadrature nodes");
    sub->add_option("--workers", opts.workers, "concurrent sweep runs");
  };
  auto* run = app.add_subcommand("run", "run one experiment and write trace.csv / summary.json");
  auto* validate = app.add_subcommand("validate", "check the schedules against the convergence hypotheses");
  auto* oracle = app.add_subcommand("oracle", "compute the reference solution");
  auto* sweep = app.add_subcommand("sweep", "run a batch over starting points and schedules");
  for (auto* sub : {run, validate, oracle, sweep}) add_common(sub);
  sweep->add_option("--dimension", dimension, "starting-points | schedules | both")
      ->check(CLI::IsMember({"starting-points", "schedules", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the configuration-error exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : tkm::kExitError;
  }

  if (*run) return tkm::cmd_run(config, opts, std::cout, std::cerr);
  if (*validate) return tkm::cmd_validate(config, opts, std::cout, std::cerr);
  if (*oracle) return tkm::cmd_oracle(config, opts, std::cout, std::cerr);
  const std::map<std::string, tkm::SweepDimension> dims{{"starting-points", tkm::SweepDimension::starting_points},
                                                         {"schedules", tkm::SweepDimension::schedules},
                                                         {"both", tkm::SweepDimension::both}};
  return tkm::cmd_sweep(config, dims.at(dimension), opts, std::cout, std::cerr);
}
