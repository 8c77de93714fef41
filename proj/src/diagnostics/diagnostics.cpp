#include "svsnn/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "svsnn/error.hpp"
#include "svsnn/model/residual.hpp"
#include "svsnn/numerics/linalg.hpp"
#include "svsnn/numerics/random.hpp"

namespace svsnn::diagnostics {

using problems::OperatorKind;

namespace {

std::string describe(const model::ConstraintPoint& pt, std::size_t index) {
  std::ostringstream os;
  os << "point " << index << " (x=" << pt.sites[0].x[0] << ", " << pt.sites[0].x[1] << "; t=" << pt.sites[0].t << ")";
  return os.str();
}

void check_spectrum(std::span<const double> sigma) {
  if (sigma.empty()) throw InvalidInput("spectrum is empty");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i])) throw InvalidInput("spectrum entries must be finite and >= 0");
    if (i > 0 && sigma[i] > sigma[i - 1]) throw InvalidInput("spectrum must be sorted descending");
  }
}

}  // namespace

numerics::DenseMatrix assemble_jacobian(const model::FieldModel& m, const problems::PdeProblem& p, OperatorKind op,
                                        std::span<const model::ConstraintPoint> points, int workers) {
  const auto* expr = p.expression(op);
  if (!expr) {
    throw ConfigurationError("operator " + std::string(problems::operator_name(op)) + " does not apply to problem " + p.id);
  }
  if (points.empty()) throw InvalidInput("assemble_jacobian: no points");
  const auto eqs = static_cast<std::size_t>(expr->equation_count);
  numerics::DenseMatrix j(points.size() * eqs, m.parameter_count());
  std::vector<std::exception_ptr> errors(points.size());

  auto run = [&](std::size_t i) {
    try {
      for (std::size_t e = 0; e < eqs; ++e) {
        const auto g = model::residual_param_gradient(m, *expr, points[i], static_cast<int>(e));
        if (!std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) {
          throw DiagnosticError("non-finite Jacobian row at " + describe(points[i], i) + ", equation " + std::to_string(e));
        }
        std::copy(g.begin(), g.end(), j.row(i * eqs + e).begin());
      }
    } catch (const DiagnosticError&) {
      errors[i] = std::current_exception();
    } catch (const std::exception& ex) {
      errors[i] = std::make_exception_ptr(DiagnosticError("Jacobian row at " + describe(points[i], i) + ": " + ex.what()));
    }
  };

  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), points.size());
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) run(i);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return j;
}

std::size_t effective_rank(std::span<const double> sigma, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("effective_rank: eta must lie in (0, 1)");
  check_spectrum(sigma);
  double total = 0.0;
  for (double s : sigma) total += s * s;
  if (total == 0.0) throw UndefinedMetric("effective rank of an all-zero spectrum is undefined");
  double acc = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    acc += sigma[k] * sigma[k];
    if (acc >= eta * total) return k + 1;
  }
  return sigma.size();
}

std::size_t algebraic_rank(std::span<const double> sigma, double rel) {
  check_spectrum(sigma);
  const double cut = rel * sigma[0];
  return static_cast<std::size_t>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cut; }));
}

double condition_number(std::span<const double> sigma) {
  const std::size_t r = algebraic_rank(sigma);
  if (r == 0) throw UndefinedMetric("condition number of an all-zero spectrum is undefined");
  return sigma[0] / sigma[r - 1];
}

JacobianReport jacobian_report(OperatorKind op, const numerics::DenseMatrix& j, std::span<const double> residuals,
                               double eta) {
  JacobianReport r;
  r.op = op;
  r.rows = j.rows();
  r.cols = j.cols();
  r.eta = eta;
  r.sigma = numerics::singular_values(j);
  r.r_eff = effective_rank(r.sigma, eta);
  r.rank = algebraic_rank(r.sigma);
  r.cond = condition_number(r.sigma);
  double ss = 0.0;
  for (double v : residuals) ss += v * v;
  r.residual_norm = std::sqrt(ss);
  return r;
}

NtkReport ntk_from_jacobian(const numerics::DenseMatrix& j) {
  if (j.empty()) throw InvalidInput("ntk_from_jacobian: empty Jacobian");
  NtkReport out;
  out.eigenvalues = numerics::symmetric_eigenvalues(numerics::gram_rows(j));
  out.sigma = numerics::singular_values_one_sided_jacobi(j);
  const std::size_t n = std::min(out.eigenvalues.size(), out.sigma.size());
  const std::size_t r = algebraic_rank(out.sigma);
  if (r == 0) throw UndefinedMetric("NTK of a zero Jacobian");
  for (std::size_t i = 0; i < std::min(r, n); ++i) {
    const double s = std::sqrt(std::max(out.eigenvalues[i], 0.0));
    out.sigma_check = std::max(out.sigma_check, std::abs(s - out.sigma[i]) / out.sigma[i]);
  }
  out.cond = out.eigenvalues[0] / out.eigenvalues[r - 1];
  const double cj = out.sigma[0] / out.sigma[r - 1];
  out.cond_ratio = out.cond / (cj * cj);
  out.low_index = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(r - 1)));
  out.high_index = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(r - 1)));
  const double q = out.sigma[out.low_index] / out.sigma[out.high_index];
  out.bias_ratio = q * q;
  return out;
}

numerics::DenseMatrix simulate_residual_decay(std::span<const double> eigenvalues, std::span<const double> r0,
                                              std::span<const double> times) {
  if (eigenvalues.size() != r0.size()) throw InvalidInput("simulate_residual_decay: eigenvalue and residual counts differ");
  for (double l : eigenvalues)
    if (!std::isfinite(l)) throw InvalidInput("simulate_residual_decay: non-finite eigenvalue");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("simulate_residual_decay: times must be finite and >= 0");
  numerics::DenseMatrix out(times.size(), eigenvalues.size());
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) out(a, i) = r0[i] * std::exp(-eigenvalues[i] * times[a]);
  return out;
}

CollapseSummary collapse_indicator(const JacobianReport& r, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("collapse fraction must lie in (0, 1]");
  CollapseSummary c;
  c.fraction = fraction;
  c.r_eff = effective_rank(r.sigma, 0.99);
  c.limit = std::min(r.rows, r.cols);
  c.collapsed = static_cast<double>(c.r_eff) < fraction * static_cast<double>(c.limit);
  std::ostringstream os;
  os << problems::operator_name(r.op) << ": r_eff(0.99) = " << c.r_eff << " of min(N, p) = " << c.limit
     << (c.collapsed ? ", collapsed" : ", not collapsed");
  c.summary = os.str();
  return c;
}

std::vector<model::ConstraintPoint> select_rows(std::span<const model::ConstraintPoint> points, std::size_t cap,
                                                std::uint64_t seed, OperatorKind op) {
  if (cap == 0) throw InvalidInput("row cap must be >= 1");
  if (points.size() <= cap) return {points.begin(), points.end()};
  auto rs = numerics::RandomSource(seed).split("diagnostics").split(problems::operator_name(op));
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  numerics::shuffle(idx, rs);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<model::ConstraintPoint> out;
  out.reserve(cap);
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

std::vector<OperatorDiagnostics> diagnose(const model::FieldModel& m, const problems::PdeProblem& p,
                                          const problems::TrainingPoints& points, const DiagnoseOptions& opts) {
  std::vector<OperatorDiagnostics> out;
  for (auto op : {OperatorKind::IC, OperatorKind::PDE, OperatorKind::BC}) {
    const auto* expr = p.expression(op);
    if (!expr || points.of(op).empty()) continue;
    const auto rows = select_rows(points.of(op), opts.row_cap, opts.seed, op);
    const auto j = assemble_jacobian(m, p, op, rows, opts.workers);
    const auto res = model::evaluate_residuals(m, *expr, rows);
    OperatorDiagnostics d;
    d.jacobian = jacobian_report(op, j, res, opts.eta);
    d.ntk = ntk_from_jacobian(j);
    d.collapse = collapse_indicator(d.jacobian, opts.collapse_fraction);
    out.push_back(std::move(d));
  }
  return out;
}

void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> sigma) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.precision(17);
  f << "sigma\n";
  for (double s : sigma) f << s << '\n';
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::ordered_json diagnostics_json(std::span<const OperatorDiagnostics> d, const DiagnoseOptions& opts) {
  nlohmann::ordered_json j;
  j["eta"] = opts.eta;
  j["collapse_fraction"] = opts.collapse_fraction;
  j["row_cap"] = opts.row_cap;
  nlohmann::ordered_json ops = nlohmann::ordered_json::object();
  for (const auto& x : d) {
    nlohmann::ordered_json o;
    o["rows"] = x.jacobian.rows;
    o["cols"] = x.jacobian.cols;
    o["sigma"] = x.jacobian.sigma;
    o["r_eff"] = x.jacobian.r_eff;
    o["rank"] = x.jacobian.rank;
    o["cond"] = x.jacobian.cond;
    o["collapsed"] = x.collapse.collapsed;
    o["residual_norm"] = x.jacobian.residual_norm;
    o["ntk"] = {{"cond", x.ntk.cond},
                {"sigma_check", x.ntk.sigma_check},
                {"cond_ratio", x.ntk.cond_ratio},
                {"low_index", x.ntk.low_index},
                {"high_index", x.ntk.high_index},
                {"bias_ratio", x.ntk.bias_ratio}};
    ops[std::string(problems::operator_name(x.jacobian.op))] = o;
  }
  j["operators"] = ops;
  return j;
}

}  // namespace svsnn::diagnostics
