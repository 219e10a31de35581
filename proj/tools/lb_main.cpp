// lb - check, compile and simulate local Event-B models
#include <unistd.h>

#include <iostream>

#include "CLI11.hpp"
#include "lb/cli/commands.hpp"

int main(int argc, char ** argv)
{
  CLI::App app{"Check, compile and simulate LB models"};
  app.require_subcommand(1);

  std::string ctx, mch;
  auto add_model = [&](CLI::App * sub) {
    sub->add_option("context", ctx, "context file (.lbc)")->required();
    sub->add_option("machine", mch, "machine file (.lbm)")->required();
  };

  bool check_json = false;
  auto * check = app.add_subcommand("check", "analyze a model and report diagnostics and holes");
  add_model(check);
  check->add_flag("--json", check_json, "machine-readable output");

  lb::cli::CompileOptions copts;
  auto * compile = app.add_subcommand("compile", "generate DistAlgo-style program text");
  add_model(compile);
  compile->add_option("--out,-o", copts.out_dir, "output directory")->capture_default_str();
  compile->add_flag("--single-file", copts.single_file, "write one combined program.da");
  compile->add_flag("--json", copts.json, "machine-readable summary");

  lb::cli::SimulateOptions sopts;
  auto * simulate = app.add_subcommand("simulate", "execute the model with a seeded scheduler");
  add_model(simulate);
  simulate->add_option("--config,-c", sopts.config_path, "configuration file");
  simulate->add_option("--seed", sopts.seed, "scheduler seed (default 0)");
  simulate->add_option("--max-steps", sopts.max_steps, "step limit (default 10000)");
  simulate->add_option("--trace", sopts.trace_path, "write the JSON trace here");
  simulate->add_option("--lossy", sopts.lossy, "enable message loss with this probability");
  simulate->add_flag("--json", sopts.json, "machine-readable summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lb::cli::kExitInput;
  }

  lb::cli::Io io{std::cout, std::cerr, lb::cli::use_color(STDERR_FILENO)};
  if (*check) {
    return lb::cli::cmd_check(ctx, mch, check_json, io);
  }
  if (*compile) {
    return lb::cli::cmd_compile(ctx, mch, copts, io);
  }
  return lb::cli::cmd_simulate(ctx, mch, sopts, io);
}
