#include <CLI11.hpp>
#include <iostream>

#include "svsnn/cli/commands.hpp"
#include "svsnn/training/training.hpp"

namespace fs = std::filesystem;
using namespace svsnn;

int main(int argc, char** argv) {
  CLI::App app{"Separable spectral network PDE solver"};
  app.require_subcommand(1);

  std::string config, out, checkpoint, problem;
  std::uint64_t seed = 0;
  int workers = 1, jobs = 1;
  std::size_t nx = 0, ny = 0, nt = 0, row_cap = 0;

  auto add_common = [&](CLI::App* c, bool with_config) {
    if (with_config) {
      c->add_option("--config,config", config, "Run configuration file")->check(CLI::ExistingFile);
    }
    c->add_option("--out", out, "Output directory");
    c->add_option("--seed", seed, "Run seed (overrides train.seed)");
    c->add_option("--workers", workers, "Worker threads for loss and Jacobian evaluation")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "Train a model and write records, checkpoint and summary");
  add_common(train, true);
  train->get_option("--config")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a grid against the exact solution");
  add_common(evaluate, false);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint.bin written by train")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--problem", problem, "Problem id (default: the one stored in the checkpoint)");
  evaluate->add_option("--nx", nx, "Grid points along x");
  evaluate->add_option("--ny", ny, "Grid points along y");
  evaluate->add_option("--nt", nt, "Grid points along t");

  auto* diagnose = app.add_subcommand("diagnose", "Jacobian spectra, effective ranks and NTK checks of a checkpoint");
  add_common(diagnose, false);
  diagnose->add_option("--checkpoint", checkpoint, "checkpoint.bin written by train")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--problem", problem, "Problem id (default: the one stored in the checkpoint)");
  diagnose->add_option("--config", config, "Configuration whose [diagnose] section applies")->check(CLI::ExistingFile);
  diagnose->add_option("--row-cap", row_cap, "Maximum Jacobian rows per operator");

  auto* sweep = app.add_subcommand("sweep", "Train every cell of the [sweep] grid and tabulate the results");
  add_common(sweep, true);
  sweep->get_option("--config")->required();
  sweep->add_option("--jobs", jobs, "Cells trained concurrently (overrides sweep.jobs)")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-problems", "Print the registered problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      cli::cmd_list_problems(std::cout);
      return 0;
    }
    if (train->parsed() || sweep->parsed()) {
      auto cfg = cli::load_config(config);
      if (!out.empty()) cfg.out_dir = out;
      auto* sub = train->parsed() ? train : sweep;
      if (sub->count("--seed")) cfg.train.seed = cfg.diagnose.seed = seed;
      if (sub->count("--workers")) cfg.train.workers = cfg.diagnose.workers = workers;
      if (train->parsed()) {
        cli::cmd_train(cfg, std::cerr);
        return 0;
      }
      if (sweep->count("--jobs")) cfg.sweep.jobs = jobs;
      return cli::cmd_sweep(cfg, std::cerr) ? 0 : 1;
    }
    const fs::path ck(checkpoint);
    if (evaluate->parsed()) {
      cli::EvaluateRequest req;
      req.checkpoint = ck;
      if (!problem.empty()) req.problem = problem;
      req.grid = {nx, ny, nt};
      req.out_dir = out.empty() ? ck.parent_path() / "eval" : fs::path(out);
      return cli::cmd_evaluate(req, std::cerr) ? 0 : 1;
    }
    cli::DiagnoseRequest req;
    req.checkpoint = ck;
    if (!problem.empty()) req.problem = problem;
    if (!config.empty()) req.options = cli::load_config(config).diagnose;
    if (row_cap > 0) req.options.row_cap = row_cap;
    req.options.workers = workers;
    if (diagnose->count("--seed")) req.seed = seed;
    req.out_dir = out.empty() ? ck.parent_path() / "diag" : fs::path(out);
    cli::cmd_diagnose(req, std::cerr);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return cli::exit_code(e);
  }
}
