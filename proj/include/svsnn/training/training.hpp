#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svsnn/model/field_model.hpp"
#include "svsnn/model/svsnn_model.hpp"
#include "svsnn/problems/problem.hpp"

namespace svsnn::training {

struct LossWeights {
  double ic = 1.0;
  double pde = 1.0;
  double bc = 1.0;
};

struct TrainConfig {
  std::size_t epochs = 5000;
  double lr = 1e-3;
  double decay = 0.99;
  std::size_t decay_every = 500;
  LossWeights weights;
  problems::PointCounts points;
  std::uint64_t seed = 0;
  std::size_t eval_stride = 500;  // 0 records the final epoch only
  int workers = 1;
  problems::GridSpec grid;

  // Throws InvalidInput naming the offending field.
  void validate() const;
};

// Recommended epochs and point counts of the problem, everything else default.
TrainConfig default_config(const problems::PdeProblem& p);

double learning_rate(const TrainConfig& cfg, std::size_t epoch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grad, double lr);

struct ComponentLoss {
  double value = 0.0;
  std::vector<double> gradient;  // empty when not requested
};

// Mean over points of the summed squared equation residuals, and its
// parameter gradient. Points are processed in fixed blocks whose partial sums
// are reduced in block order, so the result does not depend on `workers`.
ComponentLoss loss_component(const model::FieldModel& m, const problems::PdeProblem& p, problems::OperatorKind op,
                             std::span<const model::ConstraintPoint> points, int workers = 1, bool want_gradient = true);

struct LossParts {
  std::optional<double> ic, pde, bc;
};
double total_loss(const LossParts& parts, const LossWeights& w);

struct TrainRecord {
  std::size_t epoch = 0;
  LossParts losses;
  double loss_total = 0.0;
  double lr = 0.0;
  std::vector<problems::ErrorMetrics> metrics;  // per field; empty without an exact solution
};

nlohmann::ordered_json record_json(const TrainRecord& r, std::span<const std::string> field_names);

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t epoch, std::string component, double magnitude, const std::string& detail);
  std::size_t epoch;
  std::string component;
  double magnitude;
};

using RecordSink = std::function<void(const TrainRecord&)>;

struct TrainResult {
  std::vector<TrainRecord> records;
  double wall_seconds = 0.0;
};

// Samples points once, then runs full-batch Adam for cfg.epochs steps.
// Records are taken before the update of every eval_stride-th epoch and after
// the last update (epoch == cfg.epochs).
TrainResult train(model::FieldModel& m, const problems::PdeProblem& p, const TrainConfig& cfg, const RecordSink& sink = {});

struct FrequencyOverrides {
  std::vector<double> w_char, sigma, w_min, w_max;  // empty: default; one value: all directions
};

struct ModelSpec {
  std::string kind = "svsnn";  // svsnn | baseline
  std::optional<int> modes;
  std::vector<int> k;       // empty: recommended; one value: all directions
  std::vector<int> widths;  // baseline; empty: recommended
  FrequencyOverrides frequency;
  model::SvSnnInit init;
};

std::vector<sampling::FrequencyPlan> frequency_plans(const problems::PdeProblem& p, const std::vector<int>& k,
                                                     const FrequencyOverrides& o);
// Builds and initializes the model for the problem (stream "init" and, for
// the spectral model, "frequency" of seed).
std::unique_ptr<model::FieldModel> make_model(const ModelSpec& spec, const problems::PdeProblem& p, std::uint64_t seed);

}  // namespace svsnn::training
