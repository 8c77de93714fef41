#include "svsnn/baseline/train_baseline.hpp"

namespace svsnn::baseline {

BaselineRun train_baseline(const problems::PdeProblem& p, std::vector<int> widths, const training::TrainConfig& cfg,
                           const training::RecordSink& sink) {
  if (widths.empty()) widths = p.recommended.baseline_widths;
  BaselineRun run;
  run.model = std::make_unique<MlpModel>(std::move(widths), p.spatial_dim, p.temporal);
  if (run.model->field_count() != p.field_count()) {
    throw InvalidInput("baseline output width " + std::to_string(run.model->field_count()) + " does not match the " +
                       std::to_string(p.field_count()) + " fields of " + p.id);
  }
  run.model->initialize(cfg.seed);
  run.result = training::train(*run.model, p, cfg, sink);
  return run;
}

}  // namespace svsnn::baseline
