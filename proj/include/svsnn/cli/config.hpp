#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "svsnn/diagnostics/diagnostics.hpp"
#include "svsnn/problems/problem.hpp"
#include "svsnn/training/training.hpp"

namespace svsnn::cli {

struct SweepSpec {
  std::vector<int> modes;
  std::vector<double> w_char;
  std::vector<double> sigma;
  int jobs = 1;  // cells trained concurrently

  bool empty() const { return modes.empty() && w_char.empty() && sigma.empty(); }
};

struct RunConfig {
  std::string problem;
  problems::ProblemOptions problem_options;
  training::ModelSpec model;
  training::TrainConfig train;  // epochs and point counts default to the problem's recommendation
  std::filesystem::path out_dir;
  diagnostics::DiagnoseOptions diagnose;
  SweepSpec sweep;
};

// Sectioned key = value text; see docs/config.md. Unknown sections or keys,
// malformed values and out-of-range values throw ConfigurationError naming
// the source line or the section.key at fault. An unknown problem id throws
// problems::UnknownProblem.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace svsnn::cli
