#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "svsnn/cli/config.hpp"

namespace svsnn::cli {

// Every command throws ConfigurationError / InvalidInput for bad input and
// other exceptions for runtime failures; see exit_code.

// records.jsonl, checkpoint.bin, summary.json in cfg.out_dir.
void cmd_train(const RunConfig& cfg, std::ostream& log);

struct EvaluateRequest {
  std::filesystem::path checkpoint;
  std::optional<std::string> problem;  // default: the id stored in the checkpoint
  problems::GridSpec grid;
  std::filesystem::path out_dir;
};
// field_<name>.csv and metrics.json. Returns false when a metric is not finite.
bool cmd_evaluate(const EvaluateRequest& req, std::ostream& log);

struct DiagnoseRequest {
  std::filesystem::path checkpoint;
  std::optional<std::string> problem;
  diagnostics::DiagnoseOptions options;
  std::optional<std::uint64_t> seed;  // row selection; default: the training seed in the checkpoint
  std::filesystem::path out_dir;
};
// svd_<op>.csv and diag.json.
void cmd_diagnose(const DiagnoseRequest& req, std::ostream& log);

// One row per cell of the modes x w_char x sigma product in sweep.csv; each
// cell trains into cell_<i>/. Returns false when any cell failed.
bool cmd_sweep(const RunConfig& cfg, std::ostream& log);

void cmd_list_problems(std::ostream& out);

// 0 success, 1 runtime failure, 2 configuration or usage error.
int exit_code(const std::exception& e);

}  // namespace svsnn::cli
