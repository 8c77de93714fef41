#include "svsnn/training/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "svsnn/baseline/mlp_model.hpp"
#include "svsnn/model/residual.hpp"

namespace svsnn::training {

using problems::OperatorKind;

namespace {
constexpr std::size_t kBlock = 128;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidInput("train config: " + what); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (!(decay > 0.0) || decay > 1.0) fail("decay must lie in (0, 1]");
  if (decay_every < 1) fail("decay_every must be >= 1");
  for (double w : {weights.ic, weights.pde, weights.bc})
    if (!(w >= 0.0) || !std::isfinite(w)) fail("loss weights must be finite and >= 0");
  if (points.pde < 1) fail("n_pde must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
}

TrainConfig default_config(const problems::PdeProblem& p) {
  TrainConfig c;
  c.epochs = p.recommended.epochs;
  c.points = p.recommended.points;
  return c;
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  return cfg.lr * std::pow(cfg.decay, static_cast<double>(epoch / cfg.decay_every));
}

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != grad.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
    throw InvalidInput("adam_step: parameter, gradient and moment lengths differ");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grad[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

ComponentLoss loss_component(const model::FieldModel& m, const problems::PdeProblem& p, OperatorKind op,
                             std::span<const model::ConstraintPoint> points, int workers, bool want_gradient) {
  const auto* expr = p.expression(op);
  if (!expr) {
    throw ConfigurationError("operator " + std::string(problems::operator_name(op)) + " does not apply to problem " + p.id);
  }
  if (points.empty()) throw InvalidInput("loss_component: no points for operator " + std::string(problems::operator_name(op)));

  const std::size_t n = points.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const std::size_t np = m.parameter_count();
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> sums(blocks, 0.0);
  std::vector<std::vector<double>> grads(want_gradient ? blocks : 0);
  std::vector<std::exception_ptr> errors(blocks);

  auto run = [&](std::size_t b) {
    try {
      const std::size_t lo = b * kBlock;
      const auto chunk = points.subspan(lo, std::min(kBlock, n - lo));
      std::span<double> g;
      if (want_gradient) {
        grads[b].assign(np, 0.0);
        g = grads[b];
      }
      sums[b] = model::residual_block(m, *expr, chunk, scale, g).sum_squares;
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), blocks);
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < blocks; b = next++) run(b);
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ComponentLoss out;
  for (double s : sums) out.value += s;
  out.value *= scale;
  if (want_gradient) {
    out.gradient.assign(np, 0.0);
    for (const auto& g : grads)
      for (std::size_t i = 0; i < np; ++i) out.gradient[i] += g[i];
  }
  return out;
}

double total_loss(const LossParts& parts, const LossWeights& w) {
  return w.ic * parts.ic.value_or(0.0) + w.pde * parts.pde.value_or(0.0) + w.bc * parts.bc.value_or(0.0);
}

namespace {

nlohmann::ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

nlohmann::ordered_json record_json(const TrainRecord& r, std::span<const std::string> field_names) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["loss_ic"] = number_or_null(r.losses.ic);
  j["loss_pde"] = number_or_null(r.losses.pde);
  j["loss_bc"] = number_or_null(r.losses.bc);
  j["loss_total"] = number_or_null(r.loss_total);
  j["lr"] = r.lr;
  if (r.metrics.empty()) {
    j["rel_l2"] = nullptr;
    j["max_abs"] = nullptr;
  } else {
    nlohmann::ordered_json rel = nlohmann::ordered_json::object(), mx = nlohmann::ordered_json::object();
    for (std::size_t f = 0; f < r.metrics.size(); ++f) {
      rel[field_names[f]] = number_or_null(r.metrics[f].rel_l2);
      mx[field_names[f]] = number_or_null(r.metrics[f].max_abs);
    }
    j["rel_l2"] = rel;
    j["max_abs"] = mx;
  }
  return j;
}

NonFiniteLoss::NonFiniteLoss(std::size_t e, std::string c, double mag, const std::string& detail)
    : std::runtime_error("non-finite " + c + " loss at epoch " + std::to_string(e) + ": " + detail),
      epoch(e),
      component(std::move(c)),
      magnitude(mag) {}

TrainResult train(model::FieldModel& m, const problems::PdeProblem& p, const TrainConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  if (m.spatial_dim() != p.spatial_dim || m.temporal() != p.temporal || m.field_count() != p.field_count()) {
    throw ConfigurationError("model (dim " + std::to_string(m.spatial_dim()) + ", temporal " + std::to_string(m.temporal()) +
                             ", fields " + std::to_string(m.field_count()) + ") does not fit problem " + p.id);
  }
  const auto start = std::chrono::steady_clock::now();
  const auto pts = problems::sample_points(p, cfg.points, cfg.seed);
  std::optional<problems::EvalGrid> grid;
  if (p.has_exact()) grid = problems::make_eval_grid(p, cfg.grid);

  struct Term {
    OperatorKind op;
    double weight;
  };
  std::vector<Term> terms;
  if (p.ic && !pts.ic.empty()) terms.push_back({OperatorKind::IC, cfg.weights.ic});
  terms.push_back({OperatorKind::PDE, cfg.weights.pde});
  if (p.bc && !pts.bc.empty()) terms.push_back({OperatorKind::BC, cfg.weights.bc});

  TrainResult result;
  AdamState adam(m.parameter_count());
  std::vector<double> grad(m.parameter_count());
  for (std::size_t epoch = 0;; ++epoch) {
    const bool last = epoch == cfg.epochs;
    LossParts parts;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& t : terms) {
      const std::string name(problems::operator_name(t.op));
      ComponentLoss c;
      try {
        c = loss_component(m, p, t.op, pts.of(t.op), cfg.workers, !last);
      } catch (const EvaluationError& e) {
        throw NonFiniteLoss(epoch, name, std::numeric_limits<double>::infinity(), e.what());
      }
      if (!std::isfinite(c.value)) throw NonFiniteLoss(epoch, name, c.value, "loss overflowed");
      (t.op == OperatorKind::IC ? parts.ic : t.op == OperatorKind::PDE ? parts.pde : parts.bc) = c.value;
      if (!last && t.weight != 0.0)
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += t.weight * c.gradient[i];
    }
    const double lr = learning_rate(cfg, epoch);
    if (last || (cfg.eval_stride > 0 && epoch % cfg.eval_stride == 0)) {
      TrainRecord r;
      r.epoch = epoch;
      r.losses = parts;
      r.loss_total = total_loss(parts, cfg.weights);
      r.lr = lr;
      if (grid) r.metrics = problems::evaluate_metrics(m, p, *grid);
      if (sink) sink(r);
      result.records.push_back(std::move(r));
    }
    if (last) break;
    adam_step(adam, m.params(), grad, lr);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

double pick(const std::vector<double>& v, std::size_t j, double fallback, const char* what) {
  if (v.empty()) return fallback;
  if (v.size() == 1) return v[0];
  if (j >= v.size()) throw InvalidInput(std::string("frequency override ") + what + " has too few entries");
  return v[j];
}

}  // namespace

std::vector<sampling::FrequencyPlan> frequency_plans(const problems::PdeProblem& p, const std::vector<int>& k,
                                                     const FrequencyOverrides& o) {
  std::vector<sampling::FrequencyPlan> plans;
  for (int j = 0; j < p.spatial_dim; ++j) {
    const double wc = pick(o.w_char, j, p.w_char[j], "w_char");
    auto plan = sampling::FrequencyPlan::defaults(wc, k[j]);
    plan.sigma = pick(o.sigma, j, plan.sigma, "sigma");
    plan.w_min = pick(o.w_min, j, plan.w_min, "w_min");
    plan.w_max = pick(o.w_max, j, plan.w_max, "w_max");
    plan.validate();
    plans.push_back(plan);
  }
  return plans;
}

std::unique_ptr<model::FieldModel> make_model(const ModelSpec& spec, const problems::PdeProblem& p, std::uint64_t seed) {
  if (spec.kind == "svsnn") {
    std::vector<int> k = spec.k.empty() ? p.recommended.k : spec.k;
    if (k.size() == 1 && p.spatial_dim > 1) k.assign(p.spatial_dim, k[0]);
    if (static_cast<int>(k.size()) != p.spatial_dim) throw InvalidInput("model k: need one value or one per direction");
    model::SvSnnConfig cfg{spec.modes.value_or(p.recommended.modes), k, p.temporal, p.field_count()};
    cfg.validate();
    auto m = std::make_unique<model::SvSnnModel>(cfg);
    m->initialize(seed, frequency_plans(p, k, spec.frequency), spec.init);
    return m;
  }
  if (spec.kind == "baseline") {
    auto w = spec.widths.empty() ? p.recommended.baseline_widths : spec.widths;
    auto m = std::make_unique<baseline::MlpModel>(w, p.spatial_dim, p.temporal);
    if (m->field_count() != p.field_count()) throw InvalidInput("model widths: output width must equal the field count");
    m->initialize(seed);
    return m;
  }
  throw InvalidInput("model kind must be svsnn or baseline, got '" + spec.kind + "'");
}

}  // namespace svsnn::training
