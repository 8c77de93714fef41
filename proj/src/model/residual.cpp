#include "svsnn/model/residual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::model {

namespace {

struct Plan {
  std::vector<DerivSpec> specs;
  std::vector<std::size_t> spec_of;  // per quantity
};

Plan plan_for(const ResidualExpression& expr) {
  if (!expr.fn) throw ConfigurationError("residual expression has no function");
  if (expr.site_count < 1 || expr.site_count > 2) throw ConfigurationError("residual expression: site_count must be 1 or 2");
  if (expr.equation_count < 1) throw ConfigurationError("residual expression: equation_count must be positive");
  Plan plan;
  for (const auto& q : expr.quantities) {
    if (q.site < 0 || q.site >= expr.site_count) throw ConfigurationError("residual quantity refers to a missing site");
    auto it = std::find(plan.specs.begin(), plan.specs.end(), q.spec);
    if (it == plan.specs.end()) {
      plan.specs.push_back(q.spec);
      it = plan.specs.end() - 1;
    }
    plan.spec_of.push_back(static_cast<std::size_t>(it - plan.specs.begin()));
  }
  return plan;
}

}  // namespace

ResidualBlockResult residual_block(const FieldModel& model, const ResidualExpression& expr,
                                   std::span<const ConstraintPoint> points, double grad_scale,
                                   std::span<double> grad, bool keep_residuals) {
  const Plan plan = plan_for(expr);
  const std::size_t sc = static_cast<std::size_t>(expr.site_count);
  const std::size_t ns = plan.specs.size();
  const std::size_t nq = expr.quantities.size();
  const std::size_t ne = static_cast<std::size_t>(expr.equation_count);

  std::vector<Site> sites;
  sites.reserve(points.size() * sc);
  for (const auto& pt : points)
    for (std::size_t s = 0; s < sc; ++s) sites.push_back(pt.sites[s]);

  std::vector<double> values;
  std::unique_ptr<ModelCache> cache;
  if (ns > 0) {
    cache = model.forward(sites, plan.specs, values);
  }

  const bool want_grad = !grad.empty();
  std::vector<double> weights(want_grad ? sites.size() * ns : 0, 0.0);

  ResidualBlockResult result;
  if (keep_residuals) result.residuals.reserve(points.size() * ne);

  autodiff::Tape tape;
  std::vector<autodiff::Var> qs(nq);
  std::vector<autodiff::Var> out(ne);
  for (std::size_t i = 0; i < points.size(); ++i) {
    tape.clear();
    for (std::size_t k = 0; k < nq; ++k) {
      const std::size_t site = i * sc + static_cast<std::size_t>(expr.quantities[k].site);
      qs[k] = tape.parameter(values[site * ns + plan.spec_of[k]]);
    }
    std::fill(out.begin(), out.end(), autodiff::Var(0.0));
    expr.fn(points[i], qs, out);
    for (std::size_t e = 0; e < ne; ++e) {
      const double r = out[e].value;
      if (!std::isfinite(r)) {
        throw EvaluationError("residual equation " + std::to_string(e) + " is not finite at point " + std::to_string(i));
      }
      result.sum_squares += r * r;
      if (keep_residuals) result.residuals.push_back(r);
      if (!want_grad || r == 0.0 || out[e].is_constant()) continue;
      const auto dr = tape.backward(out[e]);
      for (std::size_t k = 0; k < nq; ++k) {
        if (dr[k] == 0.0) continue;
        const std::size_t site = i * sc + static_cast<std::size_t>(expr.quantities[k].site);
        weights[site * ns + plan.spec_of[k]] += grad_scale * 2.0 * r * dr[k];
      }
    }
  }
  if (want_grad && cache) model.backward(*cache, weights, grad);
  return result;
}

std::vector<double> evaluate_residuals(const FieldModel& model, const ResidualExpression& expr,
                                       std::span<const ConstraintPoint> points) {
  return residual_block(model, expr, points, 0.0, {}, true).residuals;
}

std::vector<double> residual_param_gradient(const FieldModel& model, const ResidualExpression& expr,
                                            const ConstraintPoint& point, int equation) {
  const Plan plan = plan_for(expr);
  if (equation < 0 || equation >= expr.equation_count) throw InvalidInput("residual_param_gradient: equation out of range");
  const std::size_t sc = static_cast<std::size_t>(expr.site_count);
  const std::size_t ns = plan.specs.size();
  std::vector<Site> sites(point.sites.begin(), point.sites.begin() + static_cast<std::ptrdiff_t>(sc));
  std::vector<double> values;
  std::vector<double> grad(model.parameter_count(), 0.0);
  if (ns == 0) return grad;
  const auto cache = model.forward(sites, plan.specs, values);

  autodiff::Tape tape;
  std::vector<autodiff::Var> qs;
  for (std::size_t k = 0; k < expr.quantities.size(); ++k) {
    qs.push_back(tape.parameter(values[static_cast<std::size_t>(expr.quantities[k].site) * ns + plan.spec_of[k]]));
  }
  std::vector<autodiff::Var> out(expr.equation_count, autodiff::Var(0.0));
  expr.fn(point, qs, out);
  if (out[equation].is_constant()) return grad;
  const auto dr = tape.backward(out[equation]);
  std::vector<double> weights(sc * ns, 0.0);
  for (std::size_t k = 0; k < qs.size(); ++k) {
    weights[static_cast<std::size_t>(expr.quantities[k].site) * ns + plan.spec_of[k]] += dr[k];
  }
  model.backward(*cache, weights, grad);
  return grad;
}

ResidualExpression value_residual(int field, std::function<double(const ConstraintPoint&)> value) {
  ResidualExpression e;
  e.quantities = {Quantity{0, DerivSpec{field, {}, 0}}};
  e.fn = [value = std::move(value)](const ConstraintPoint& p, std::span<const autodiff::Var> q,
                                    std::span<autodiff::Var> out) { out[0] = q[0] - value(p); };
  return e;
}

}  // namespace svsnn::model
