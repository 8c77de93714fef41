#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "svsnn/autodiff/tape.hpp"
#include "svsnn/model/field_model.hpp"

namespace svsnn::model {

// A model output needed by a residual: derivative `spec` evaluated at site
// `site` of the constraint point (site 1 is the partner of a paired point).
struct Quantity {
  int site = 0;
  DerivSpec spec;
};

struct ConstraintPoint {
  std::array<Site, 2> sites{};
  int component = 0;  // boundary component label
};

// fn receives the quantity values in the order of `quantities` and writes
// equation_count residuals. It runs on an autodiff tape, so any expression
// built from the supported primitives is differentiable.
using ResidualFn = std::function<void(const ConstraintPoint&, std::span<const autodiff::Var>, std::span<autodiff::Var>)>;

struct ResidualExpression {
  std::vector<Quantity> quantities;
  int site_count = 1;
  int equation_count = 1;
  ResidualFn fn;
};

struct ResidualBlockResult {
  double sum_squares = 0.0;
  std::vector<double> residuals;  // point-major, equation_count per point (when requested)
};

// Evaluates residuals of points; when grad is non-empty, adds
// grad_scale * sum_i sum_e 2 r_ie dr_ie/dtheta into it.
ResidualBlockResult residual_block(const FieldModel& model, const ResidualExpression& expr,
                                   std::span<const ConstraintPoint> points, double grad_scale,
                                   std::span<double> grad, bool keep_residuals = false);

std::vector<double> evaluate_residuals(const FieldModel& model, const ResidualExpression& expr,
                                       std::span<const ConstraintPoint> points);

// d r_equation / d theta at a single point.
std::vector<double> residual_param_gradient(const FieldModel& model, const ResidualExpression& expr,
                                            const ConstraintPoint& point, int equation = 0);

// Dirichlet-style residual u_field(site 0) - value(point).
ResidualExpression value_residual(int field, std::function<double(const ConstraintPoint&)> value);

}  // namespace svsnn::model
