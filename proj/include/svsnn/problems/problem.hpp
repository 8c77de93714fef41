#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svsnn/autodiff/dual.hpp"
#include "svsnn/error.hpp"
#include "svsnn/model/field_model.hpp"
#include "svsnn/model/residual.hpp"
#include "svsnn/numerics/random.hpp"
#include "svsnn/sampling/geometry.hpp"

namespace svsnn::problems {

enum class OperatorKind { IC, PDE, BC };
std::string_view operator_name(OperatorKind op);  // "ic", "pde", "bc"
OperatorKind parse_operator(std::string_view name);

// All fields at once: x has spatial_dim entries, out has field_count entries.
using ExactFn = std::function<void(std::span<const autodiff::Dual2> x, const autodiff::Dual2& t,
                                   std::span<autodiff::Dual2> out)>;

struct PointCounts {
  std::size_t ic = 0;
  std::size_t pde = 0;
  std::vector<std::size_t> bc;  // one entry per boundary component
};

struct Recommended {
  int modes = 4;
  std::vector<int> k;
  std::size_t epochs = 5000;
  PointCounts points;
  std::vector<int> baseline_widths;
};

enum class TgBoundary { Periodic, Exact };

struct ProblemOptions {
  double reynolds = 100.0;
  TgBoundary tg_boundary = TgBoundary::Periodic;
};

struct PdeProblem {
  std::string id;
  std::string title;
  int spatial_dim = 1;
  bool temporal = false;
  std::vector<std::string> field_names;
  std::vector<bool> gauge_field;  // compared up to an additive constant
  std::vector<std::pair<double, double>> box;  // spatial bounding box per direction
  std::pair<double, double> time{0.0, 1.0};
  sampling::DomainGeometry geometry;            // used when spatial_dim == 2
  std::vector<double> w_char;                   // per spatial direction

  model::ResidualExpression pde;
  std::optional<model::ResidualExpression> ic;
  std::optional<model::ResidualExpression> bc;
  bool periodic_bc = false;  // bc points are (x, partner) pairs
  std::size_t bc_components = 1;
  bool ic_grid = false;      // IC points on a uniform spatial grid instead of LHS

  ExactFn exact;  // empty when no closed form is known
  Recommended recommended;

  int field_count() const { return static_cast<int>(field_names.size()); }
  const model::ResidualExpression* expression(OperatorKind op) const;
  bool has_exact() const { return static_cast<bool>(exact); }
  double exact_value(int field, std::span<const double> x, double t = 0.0) const;
  // Inside the closed outer boundary and outside every open hole.
  bool valid_point(std::span<const double> x) const;
};

PdeProblem make_heat(double kappa);
PdeProblem make_helmholtz(double kappa);
PdeProblem make_helmholtz_cylinder();
PdeProblem make_nonlinear_elliptic();
PdeProblem make_poisson_complex_domain();
PdeProblem make_poisson_complex_source();
PdeProblem make_taylor_green(double reynolds, TgBoundary boundary = TgBoundary::Periodic);
PdeProblem make_double_cylinder_ns();

class UnknownProblem : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

std::vector<std::string> problem_ids();
PdeProblem make_problem(std::string_view id, const ProblemOptions& opts = {});

// Closed-form solution seen through the model interface: no parameters,
// derivatives from nested dual numbers.
class ExactFieldModel final : public model::FieldModel {
 public:
  explicit ExactFieldModel(const PdeProblem& p);

  std::string kind() const override { return "exact"; }
  int spatial_dim() const override { return dim_; }
  bool temporal() const override { return temporal_; }
  int field_count() const override { return fields_; }
  std::span<const double> params() const override { return {}; }
  std::span<double> params() override { return {}; }
  std::unique_ptr<model::ModelCache> forward(std::span<const model::Site> sites,
                                             std::span<const model::DerivSpec> specs,
                                             std::vector<double>& values) const override;
  void backward(const model::ModelCache&, std::span<const double>, std::span<double>) const override {}
  std::unique_ptr<model::FieldModel> clone() const override { return std::make_unique<ExactFieldModel>(*this); }

 private:
  ExactFn exact_;
  int dim_;
  bool temporal_;
  int fields_;
};

struct TrainingPoints {
  std::vector<model::ConstraintPoint> ic;
  std::vector<model::ConstraintPoint> pde;
  std::vector<model::ConstraintPoint> bc;

  const std::vector<model::ConstraintPoint>& of(OperatorKind op) const;
};

// Streams "points.ic", "points.pde", "points.bc" derived from seed.
TrainingPoints sample_points(const PdeProblem& p, const PointCounts& counts, std::uint64_t seed);

struct EvalGrid {
  std::vector<model::Site> sites;
  std::size_t nx = 0, ny = 0, nt = 0;
};
struct GridSpec {
  std::size_t nx = 0, ny = 0, nt = 0;  // 0 picks the default
};
EvalGrid make_eval_grid(const PdeProblem& p, const GridSpec& spec = {});

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double max_abs = 0.0;
};
double rel_l2(std::span<const double> predicted, std::span<const double> reference);
double max_abs_error(std::span<const double> predicted, std::span<const double> reference);

// Field values of a model at sites, evaluated in bounded batches.
std::vector<double> predict(const model::FieldModel& m, std::span<const model::Site> sites, int field);
std::vector<double> exact_values(const PdeProblem& p, std::span<const model::Site> sites, int field);
// Gauge fields have the mean difference removed before comparison.
ErrorMetrics field_metrics(const PdeProblem& p, int field, std::span<const double> predicted,
                           std::span<const double> reference);
std::vector<ErrorMetrics> evaluate_metrics(const model::FieldModel& m, const PdeProblem& p, const EvalGrid& grid);

}  // namespace svsnn::problems
