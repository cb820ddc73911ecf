// Command-line front end: `momadapt run` executes a configured solve /
// sweep / adaptive run and writes its data files; `momadapt compare` tables
// a candidate run against a reference run.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "momadapt/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Goal-adaptive DG moment solver for the steady BGK equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool full_scale = false;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a configured run");
  run_cmd->add_option("--config", config_path, "config file (JSON)")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  run_cmd->add_flag("--full-scale", full_scale,
                    "use the full-scale element counts");

  std::string ref_dir, cand_dir;
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "compare a candidate run to a reference");
  cmp_cmd->add_option("--ref", ref_dir, "reference run directory")->required();
  cmp_cmd->add_option("--cand", cand_dir, "candidate run directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      momadapt::RunConfig cfg;
      try {
        cfg = momadapt::load_run_config(config_path);
      } catch (const momadapt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      if (full_scale) {
        cfg.full_scale = true;
        if (cfg.is_heat_transfer())
          std::get<momadapt::HeatTransferConfig>(cfg.problem).n_elements = 1000;
        else
          std::get<momadapt::ShockConfig>(cfg.problem).n_elements = 1250;
      }
      momadapt::run(cfg, out_dir);
    } else {
      std::cout << momadapt::compare_runs(ref_dir, cand_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
