#pragma once

#include <memory>
#include <vector>

#include "svsnn/baseline/mlp_model.hpp"
#include "svsnn/problems/problem.hpp"
#include "svsnn/training/training.hpp"

namespace svsnn::baseline {

struct BaselineRun {
  std::unique_ptr<MlpModel> model;
  training::TrainResult result;
};

// Glorot-initialized network (stream "init" of cfg.seed) trained by the
// shared loop. Empty widths take the problem's recommended comparator.
BaselineRun train_baseline(const problems::PdeProblem& p, std::vector<int> widths, const training::TrainConfig& cfg,
                           const training::RecordSink& sink = {});

}  // namespace svsnn::baseline
