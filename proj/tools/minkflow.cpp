#include <iostream>

#include <CLI11.hpp>

#include "minkflow/cli.hpp"
#include "minkflow/parallel.hpp"

int main(int argc, char** argv) {
  minkflow::apply_thread_cap_from_env();

  CLI::App app{"minkflow: anisotropic Gauss curvature flows and L_p Minkowski problems on the sphere"};
  app.require_subcommand(1);
  minkflow::CliArgs args;
  std::string out_dir;
  std::uint64_t seed = 0;

  for (const char* name : {"flow", "lp-solve", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "run configuration (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config's `out`)");
    sub->add_option("--seed", seed, "seed for randomized shapes (overrides the config's `seed`)");
    sub->callback([&args, sub, name, &out_dir, &seed] {
      args.command = name;
      if (sub->count("--out")) args.out_dir = out_dir;
      if (sub->count("--seed")) args.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minkflow::exit_config;
  }
  return minkflow::run_command(args, std::cout, std::cerr);
}
