#include "svsnn/problems/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace svsnn::problems {

using autodiff::Dual1;
using autodiff::Dual2;
using autodiff::Var;
using model::ConstraintPoint;
using model::DerivSpec;
using model::Quantity;
using model::ResidualExpression;
using model::Site;
using D = Dual2;

namespace {

constexpr double kPi = std::numbers::pi;

Quantity q(int field, int dx, int dy, int dt = 0, int site = 0) { return {site, DerivSpec{field, {dx, dy, 0}, dt}}; }

double xs(const ConstraintPoint& p, int i) { return p.sites[0].x[i]; }

// Residual of the listed fields against a per-field datum at site 0.
ResidualExpression values_residual(std::vector<int> fields, std::function<double(const ConstraintPoint&, int)> value) {
  ResidualExpression e;
  for (int f : fields) e.quantities.push_back(q(f, 0, 0));
  e.equation_count = static_cast<int>(fields.size());
  e.fn = [fields, value](const ConstraintPoint& p, std::span<const Var> qv, std::span<Var> out) {
    for (std::size_t i = 0; i < fields.size(); ++i) out[i] = qv[i] - Var(value(p, fields[i]));
  };
  return e;
}

ResidualExpression exact_dirichlet(const PdeProblem& prob, std::vector<int> fields) {
  const ExactFn exact = prob.exact;
  const int dim = prob.spatial_dim;
  const int nf = prob.field_count();
  return values_residual(std::move(fields), [exact, dim, nf](const ConstraintPoint& p, int f) {
    D x[3];
    for (int i = 0; i < dim; ++i) x[i] = D(p.sites[0].x[i]);
    D out[3];
    exact(std::span<const D>(x, dim), D(p.sites[0].t), std::span<D>(out, nf));
    return primal(out[f]);
  });
}

std::vector<int> widths(int in, int hidden, int layers, int out) {
  std::vector<int> w{in};
  for (int i = 0; i < layers; ++i) w.push_back(hidden);
  w.push_back(out);
  return w;
}

PdeProblem square_base(std::string id, std::string title, double a, double b) {
  PdeProblem p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.spatial_dim = 2;
  p.field_names = {"u"};
  p.gauge_field = {false};
  p.box = {{a, b}, {a, b}};
  p.geometry = sampling::DomainGeometry::rectangle(a, b, a, b);
  return p;
}

}  // namespace

std::string_view operator_name(OperatorKind op) {
  switch (op) {
    case OperatorKind::IC: return "ic";
    case OperatorKind::PDE: return "pde";
    default: return "bc";
  }
}

OperatorKind parse_operator(std::string_view name) {
  if (name == "ic") return OperatorKind::IC;
  if (name == "pde") return OperatorKind::PDE;
  if (name == "bc") return OperatorKind::BC;
  throw InvalidInput("unknown operator '" + std::string(name) + "' (expected ic, pde or bc)");
}

const ResidualExpression* PdeProblem::expression(OperatorKind op) const {
  switch (op) {
    case OperatorKind::IC: return ic ? &*ic : nullptr;
    case OperatorKind::PDE: return &pde;
    default: return bc ? &*bc : nullptr;
  }
}

double PdeProblem::exact_value(int field, std::span<const double> x, double t) const {
  if (!exact) throw ConfigurationError("problem " + id + " has no exact solution");
  if (field < 0 || field >= field_count()) throw InvalidInput("exact_value: field out of range");
  D xd[3];
  for (int i = 0; i < spatial_dim; ++i) xd[i] = D(x[i]);
  D out[3];
  exact(std::span<const D>(xd, spatial_dim), D(t), std::span<D>(out, field_count()));
  return primal(out[field]);
}

bool PdeProblem::valid_point(std::span<const double> x) const {
  if (spatial_dim == 1) return x[0] >= box[0].first && x[0] <= box[0].second;
  const auto& g = geometry;
  const double px = x[0], py = x[1];
  if (g.outer == sampling::DomainGeometry::Outer::Rectangle) {
    if (px < g.x0 || px > g.x1 || py < g.y0 || py > g.y1) return false;
  } else {
    const double dx = px - g.disk.cx, dy = py - g.disk.cy;
    if (dx * dx + dy * dy > g.disk.r * g.disk.r * (1.0 + 1e-12)) return false;
  }
  for (const auto& c : g.circle_holes) {
    const double dx = px - c.cx, dy = py - c.cy;
    if (dx * dx + dy * dy < c.r * c.r) return false;
  }
  for (const auto& e : g.ellipse_holes) {
    const double dx = px - e.cx, dy = py - e.cy;
    if (e.qx * dx * dx + e.qy * dy * dy < 1.0) return false;
  }
  return true;
}

PdeProblem make_heat(double kappa) {
  if (!(kappa > 0.0)) throw InvalidInput("make_heat: kappa must be positive");
  PdeProblem p;
  const long per_pi = std::lround(kappa / kPi);
  p.id = std::abs(per_pi * kPi - kappa) < 1e-9 * kappa ? "heat" + std::to_string(per_pi) + "pi" : "heat";
  p.title = "Heat equation u_t = u_xx / kappa^2, u(x,0) = sin(kappa x)";
  p.spatial_dim = 1;
  p.temporal = true;
  p.field_names = {"u"};
  p.gauge_field = {false};
  p.box = {{-1.0, 1.0}};
  p.w_char = {kappa};
  const double alpha = 1.0 / (kappa * kappa);
  p.pde.quantities = {q(0, 0, 0, 1), q(0, 2, 0)};
  p.pde.fn = [alpha](const ConstraintPoint&, std::span<const Var> v, std::span<Var> out) { out[0] = v[0] - Var(alpha) * v[1]; };
  p.ic = model::value_residual(0, [kappa](const ConstraintPoint& pt) { return std::sin(kappa * xs(pt, 0)); });
  p.bc = model::value_residual(0, [](const ConstraintPoint&) { return 0.0; });
  p.exact = [kappa](std::span<const D> x, const D& t, std::span<D> out) { out[0] = exp(-t) * sin(kappa * x[0]); };
  auto& r = p.recommended;
  if (kappa <= 30.0 * kPi) {
    r.modes = 10;
    r.k = {40};
    r.points = {1000, 10000, {200}};
    r.baseline_widths = widths(2, 100, 5, 1);
  } else {
    r.modes = 4;
    r.k = {50};
    r.points = {kappa <= 200.0 * kPi ? 2000u : 5000u, 10000, {200}};
    r.baseline_widths = widths(2, 120, 5, 1);
  }
  r.epochs = 5000;
  return p;
}

PdeProblem make_helmholtz(double kappa) {
  if (!(kappa > 0.0)) throw InvalidInput("make_helmholtz: kappa must be positive");
  const long per_pi = std::lround(kappa / kPi);
  auto p = square_base(std::abs(per_pi * kPi - kappa) < 1e-9 * kappa ? "helmholtz" + std::to_string(per_pi) + "pi" : "helmholtz",
                       "Helmholtz equation -lap u - kappa^2 u = f on the unit square", 0.0, 1.0);
  p.w_char = {kappa, kappa};
  p.pde.quantities = {q(0, 2, 0), q(0, 0, 2), q(0, 0, 0)};
  p.pde.fn = [kappa](const ConstraintPoint& pt, std::span<const Var> v, std::span<Var> out) {
    const double f = kappa * kappa * std::sin(kappa * xs(pt, 0)) * std::sin(kappa * xs(pt, 1));
    out[0] = -(v[0] + v[1]) - Var(kappa * kappa) * v[2] - Var(f);
  };
  p.bc = model::value_residual(0, [](const ConstraintPoint&) { return 0.0; });
  p.exact = [kappa](std::span<const D> x, const D&, std::span<D> out) { out[0] = sin(kappa * x[0]) * sin(kappa * x[1]); };
  auto& r = p.recommended;
  if (kappa <= 30.0 * kPi) {
    r.modes = 6;
    r.k = {64, 64};
    r.points = {0, 10000, {400}};
    r.baseline_widths = widths(2, 100, 5, 1);
  } else {
    r.modes = 8;
    r.k = {64, 64};
    r.points = {0, 20000, {800}};
    r.baseline_widths = widths(2, 120, 5, 1);
  }
  return p;
}

PdeProblem make_helmholtz_cylinder() {
  const double kappa = 24.0 * kPi;
  auto p = make_helmholtz(kappa);
  p.id = "helmholtz24pi-cyl";
  p.title = "Helmholtz equation on the unit square minus a disk";
  p.geometry.circle_holes.push_back({0.5, 0.5, 0.15});
  p.bc_components = 2;
  p.bc = model::value_residual(0, [kappa](const ConstraintPoint& pt) {
    return pt.component == 0 ? 0.0 : std::sin(kappa * xs(pt, 0)) * std::sin(kappa * xs(pt, 1));
  });
  p.recommended.points = {0, 10000, {400, 200}};
  return p;
}

PdeProblem make_nonlinear_elliptic() {
  auto p = square_base("nonlin-elliptic", "Nonlinear elliptic equation lap u + u^2 = f", 0.0, 1.0);
  p.w_char = {10.0, 10.0};
  // f = lap u + u^2 for u = (x + y) cos(10x) sin(10y).
  p.pde.quantities = {q(0, 2, 0), q(0, 0, 2), q(0, 0, 0)};
  p.pde.fn = [](const ConstraintPoint& pt, std::span<const Var> v, std::span<Var> out) {
    const double x = xs(pt, 0), y = xs(pt, 1), s = x + y;
    const double c = std::cos(10 * x), sn = std::sin(10 * y);
    const double f = -200 * s * c * sn - 20 * std::sin(10 * x) * sn + 20 * c * std::cos(10 * y) + s * s * c * c * sn * sn;
    out[0] = v[0] + v[1] + v[2] * v[2] - Var(f);
  };
  p.exact = [](std::span<const D> x, const D&, std::span<D> out) { out[0] = (x[0] + x[1]) * cos(10.0 * x[0]) * sin(10.0 * x[1]); };
  p.bc = exact_dirichlet(p, {0});
  p.recommended = {4, {32, 32}, 5000, {0, 10000, {1024}}, widths(2, 100, 5, 1)};
  return p;
}

PdeProblem make_poisson_complex_domain() {
  const double mu = 7.0 * kPi;
  auto p = square_base("poisson-holes", "Poisson equation on a square with three disks and an ellipse removed", -1.0, 1.0);
  p.geometry.circle_holes = {{-0.5, -0.5, 0.1}, {0.5, 0.5, 0.2}, {0.5, -0.5, 0.2}};
  p.geometry.ellipse_holes = {{-0.5, 0.5, 16.0, 64.0}};
  p.bc_components = 5;
  p.w_char = {mu, mu};
  p.pde.quantities = {q(0, 2, 0), q(0, 0, 2)};
  p.pde.fn = [mu](const ConstraintPoint& pt, std::span<const Var> v, std::span<Var> out) {
    const double f = 2 * mu * mu * std::sin(mu * xs(pt, 0)) * std::sin(mu * xs(pt, 1));
    out[0] = -(v[0] + v[1]) - Var(f);
  };
  p.exact = [mu](std::span<const D> x, const D&, std::span<D> out) { out[0] = sin(mu * x[0]) * sin(mu * x[1]); };
  p.bc = exact_dirichlet(p, {0});
  p.recommended = {8, {40, 40}, 5000, {0, 20000, {400, 200, 200, 200, 200}}, widths(2, 100, 5, 1)};
  return p;
}

PdeProblem make_poisson_complex_source() {
  const double mu = 15.0;
  auto p = square_base("poisson-source15", "Poisson equation with exact solution sin(15x^2) + sin(15y^2)", -1.0, 1.0);
  p.w_char = {mu, mu};
  p.pde.quantities = {q(0, 2, 0), q(0, 0, 2)};
  p.pde.fn = [mu](const ConstraintPoint& pt, std::span<const Var> v, std::span<Var> out) {
    const double x2 = xs(pt, 0) * xs(pt, 0), y2 = xs(pt, 1) * xs(pt, 1);
    const double f = 4 * mu * mu * x2 * std::sin(mu * x2) - 2 * mu * std::cos(mu * x2) + 4 * mu * mu * y2 * std::sin(mu * y2) -
                     2 * mu * std::cos(mu * y2);
    out[0] = -(v[0] + v[1]) - Var(f);
  };
  p.exact = [mu](std::span<const D> x, const D&, std::span<D> out) { out[0] = sin(mu * (x[0] * x[0])) + sin(mu * (x[1] * x[1])); };
  p.bc = exact_dirichlet(p, {0});
  p.recommended = {4, {50, 50}, 5000, {0, 10000, {1024}}, widths(2, 100, 3, 1)};
  return p;
}

namespace {

// Momentum (two equations, with optional time derivative and body force) and continuity.
void navier_stokes(ResidualExpression& e, bool unsteady, double nu, std::function<std::array<double, 2>(double, double)> force) {
  e.quantities = {q(0, 0, 0), q(0, 1, 0), q(0, 0, 1), q(0, 2, 0), q(0, 0, 2),   // u
                  q(1, 0, 0), q(1, 1, 0), q(1, 0, 1), q(1, 2, 0), q(1, 0, 2),   // v
                  q(2, 1, 0), q(2, 0, 1)};                                      // p
  if (unsteady) {
    e.quantities.push_back(q(0, 0, 0, 1));
    e.quantities.push_back(q(1, 0, 0, 1));
  }
  e.equation_count = 3;
  e.fn = [unsteady, nu, force](const ConstraintPoint& pt, std::span<const Var> v, std::span<Var> out) {
    const Var &u = v[0], &ux = v[1], &uy = v[2], &uxx = v[3], &uyy = v[4];
    const Var &w = v[5], &wx = v[6], &wy = v[7], &wxx = v[8], &wyy = v[9];
    const Var &px = v[10], &py = v[11];
    const auto s = force ? force(xs(pt, 0), xs(pt, 1)) : std::array<double, 2>{0.0, 0.0};
    out[0] = u * ux + w * uy + px - Var(nu) * (uxx + uyy) - Var(s[0]);
    out[1] = u * wx + w * wy + py - Var(nu) * (wxx + wyy) - Var(s[1]);
    if (unsteady) {
      out[0] = out[0] + v[12];
      out[1] = out[1] + v[13];
    }
    out[2] = ux + wy;
  };
}

}  // namespace

PdeProblem make_taylor_green(double reynolds, TgBoundary boundary) {
  if (!(reynolds > 0.0)) throw InvalidInput("make_taylor_green: Reynolds number must be positive");
  PdeProblem p;
  p.id = "taylor-green";
  p.title = "Taylor-Green vortex, incompressible Navier-Stokes on [-pi,pi]^2 x [0,1]";
  p.spatial_dim = 2;
  p.temporal = true;
  p.field_names = {"u", "v", "p"};
  p.gauge_field = {false, false, true};
  p.box = {{-kPi, kPi}, {-kPi, kPi}};
  p.geometry = sampling::DomainGeometry::rectangle(-kPi, kPi, -kPi, kPi);
  p.w_char = {kPi, kPi};
  navier_stokes(p.pde, true, 1.0 / reynolds, nullptr);
  p.exact = [reynolds](std::span<const D> x, const D& t, std::span<D> out) {
    const D decay = exp(t * (-2.0 * kPi * kPi / reynolds));
    out[0] = -cos(kPi * x[0]) * sin(kPi * x[1]) * decay;
    out[1] = sin(kPi * x[0]) * cos(kPi * x[1]) * decay;
    out[2] = -0.25 * (cos(2.0 * kPi * x[0]) + cos(2.0 * kPi * x[1])) * (decay * decay);
  };
  p.ic = values_residual({0, 1, 2}, [](const ConstraintPoint& pt, int f) {
    const double x = xs(pt, 0), y = xs(pt, 1);
    if (f == 0) return -std::cos(kPi * x) * std::sin(kPi * y);
    if (f == 1) return std::sin(kPi * x) * std::cos(kPi * y);
    return -0.25 * (std::cos(2 * kPi * x) + std::cos(2 * kPi * y));
  });
  p.ic_grid = true;
  if (boundary == TgBoundary::Periodic) {
    p.periodic_bc = true;
    ResidualExpression e;
    e.site_count = 2;
    e.equation_count = 2;
    e.quantities = {q(0, 0, 0, 0, 0), q(0, 0, 0, 0, 1), q(1, 0, 0, 0, 0), q(1, 0, 0, 0, 1)};
    e.fn = [](const ConstraintPoint&, std::span<const Var> v, std::span<Var> out) {
      out[0] = v[0] - v[1];
      out[1] = v[2] - v[3];
    };
    p.bc = e;
  } else {
    p.bc = exact_dirichlet(p, {0, 1});
  }
  p.recommended = {6, {32, 32}, 5000, {10000, 10000, {2000}}, widths(3, 100, 5, 3)};
  return p;
}

PdeProblem make_double_cylinder_ns() {
  PdeProblem p;
  p.id = "ns-two-cyl";
  p.title = "Steady Navier-Stokes in a disk of radius 3 with two cylinders removed";
  p.spatial_dim = 2;
  p.field_names = {"u", "v", "p"};
  p.gauge_field = {false, false, true};
  p.box = {{-3.0, 3.0}, {-3.0, 3.0}};
  p.geometry = sampling::DomainGeometry::circle(0.0, 0.0, 3.0);
  p.geometry.circle_holes = {{-1.0, 0.5, 0.3}, {1.0, -0.5, 0.3}};
  p.bc_components = 3;
  p.w_char = {2.0, 2.0};
  navier_stokes(p.pde, false, 1.0, [](double x, double y) {
    return std::array<double, 2>{
        std::sin(4 * x) - 0.25 * std::sin(x - 3 * y) + std::sin(x + y) + 8 * std::sin(2 * x) * std::cos(2 * y) +
            0.75 * std::sin(3 * x - y),
        std::sin(4 * y) - 0.75 * std::sin(x - 3 * y) - std::sin(x + y) - 8 * std::cos(2 * x) * std::sin(2 * y) +
            0.25 * std::sin(3 * x - y)};
  });
  // Manufactured pair reproducing the body force exactly (unit density and viscosity).
  p.exact = [](std::span<const D> x, const D&, std::span<D> out) {
    const D shear = 0.5 * sin(x[0] + x[1]);
    out[0] = sin(2.0 * x[0]) * cos(2.0 * x[1]) + shear;
    out[1] = -(cos(2.0 * x[0]) * sin(2.0 * x[1])) - shear;
    out[2] = D(0.0);
  };
  p.bc = exact_dirichlet(p, {0, 1});
  p.recommended = {4, {16, 16}, 15000, {0, 20000, {400, 100, 100}}, widths(2, 50, 4, 3)};
  return p;
}

std::vector<std::string> problem_ids() {
  return {"heat20pi",        "heat100pi",     "heat500pi",        "helmholtz24pi",    "helmholtz24pi-cyl", "helmholtz48pi",
          "nonlin-elliptic", "poisson-holes", "poisson-source15", "taylor-green",     "ns-two-cyl"};
}

PdeProblem make_problem(std::string_view id, const ProblemOptions& opts) {
  if (id == "heat20pi") return make_heat(20 * kPi);
  if (id == "heat100pi") return make_heat(100 * kPi);
  if (id == "heat500pi") return make_heat(500 * kPi);
  if (id == "helmholtz24pi") return make_helmholtz(24 * kPi);
  if (id == "helmholtz24pi-cyl") return make_helmholtz_cylinder();
  if (id == "helmholtz48pi") return make_helmholtz(48 * kPi);
  if (id == "nonlin-elliptic") return make_nonlinear_elliptic();
  if (id == "poisson-holes") return make_poisson_complex_domain();
  if (id == "poisson-source15") return make_poisson_complex_source();
  if (id == "taylor-green") return make_taylor_green(opts.reynolds, opts.tg_boundary);
  if (id == "ns-two-cyl") return make_double_cylinder_ns();
  std::string msg = "unknown problem '" + std::string(id) + "'; valid ids:";
  for (const auto& s : problem_ids()) msg += " " + s;
  throw UnknownProblem(msg);
}

ExactFieldModel::ExactFieldModel(const PdeProblem& p)
    : exact_(p.exact), dim_(p.spatial_dim), temporal_(p.temporal), fields_(p.field_count()) {
  if (!exact_) throw ConfigurationError("problem " + p.id + " has no exact solution");
}

std::unique_ptr<model::ModelCache> ExactFieldModel::forward(std::span<const Site> sites, std::span<const DerivSpec> specs,
                                                            std::vector<double>& values) const {
  check_specs(specs);
  values.assign(sites.size() * specs.size(), 0.0);
  D x[3], out[3];
  for (std::size_t p = 0; p < sites.size(); ++p) {
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const auto& sp = specs[s];
      // Axes 0..2 are spatial, axis 3 is time; a is differentiated by the
      // outer tangent, b by the inner one.
      int a = -1, b = -1;
      for (int ax = 0; ax < 4; ++ax) {
        const int order = ax < 3 ? sp.dx[ax] : sp.dt;
        for (int r = 0; r < order; ++r) (a < 0 ? a : b) = ax;
      }
      auto seed = [&](int ax, double v) { return D(Dual1(v, b == ax ? 1.0 : 0.0), Dual1(a == ax ? 1.0 : 0.0, 0.0)); };
      for (int i = 0; i < dim_; ++i) x[i] = seed(i, sites[p].x[i]);
      exact_(std::span<const D>(x, dim_), seed(3, sites[p].t), std::span<D>(out, fields_));
      const D& y = out[sp.field];
      values[p * specs.size() + s] = b >= 0 ? y.d.d : (a >= 0 ? y.d.v : y.v.v);
    }
  }
  return std::make_unique<model::ModelCache>();
}

const std::vector<ConstraintPoint>& TrainingPoints::of(OperatorKind op) const {
  switch (op) {
    case OperatorKind::IC: return ic;
    case OperatorKind::PDE: return pde;
    default: return bc;
  }
}

namespace {

ConstraintPoint make_point(double x, double y, double t, int component = 0) {
  ConstraintPoint c;
  c.sites[0].x = {x, y, 0.0};
  c.sites[0].t = t;
  c.component = component;
  return c;
}

std::vector<std::vector<double>> lhs(numerics::RandomSource& rs, std::size_t n, std::vector<std::pair<double, double>> box) {
  return sampling::lhs_points(rs, n, box);
}

}  // namespace

TrainingPoints sample_points(const PdeProblem& p, const PointCounts& counts, std::uint64_t seed) {
  if (counts.pde == 0) throw InvalidInput("sample_points: at least one PDE point is required");
  if (p.bc && counts.bc.size() != p.bc_components) {
    throw InvalidInput("sample_points: problem " + p.id + " has " + std::to_string(p.bc_components) +
                       " boundary components, got " + std::to_string(counts.bc.size()) + " counts");
  }
  const numerics::RandomSource root(seed);
  TrainingPoints out;
  const double t0 = p.time.first;

  if (p.temporal && p.ic && counts.ic > 0) {
    auto rs = root.split("points.ic");
    if (p.spatial_dim == 1) {
      for (const auto& r : lhs(rs, counts.ic, {p.box[0]})) out.ic.push_back(make_point(r[0], 0.0, t0));
    } else if (p.ic_grid) {
      const auto g = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(counts.ic))));
      const auto gx = numerics::linspace(p.box[0].first, p.box[0].second, std::max<std::size_t>(g, 1));
      const auto gy = numerics::linspace(p.box[1].first, p.box[1].second, std::max<std::size_t>(g, 1));
      for (double y : gy)
        for (double x : gx) out.ic.push_back(make_point(x, y, t0));
    } else {
      for (const auto& q2 : sampling::interior_points(p.geometry, counts.ic, rs)) out.ic.push_back(make_point(q2[0], q2[1], t0));
    }
  }

  {
    auto rs = root.split("points.pde");
    if (p.spatial_dim == 1) {
      for (const auto& r : lhs(rs, counts.pde, {p.box[0], p.time})) out.pde.push_back(make_point(r[0], 0.0, r[1]));
    } else if (p.temporal) {
      for (const auto& r : lhs(rs, counts.pde, {p.box[0], p.box[1], p.time}))
        out.pde.push_back(make_point(r[0], r[1], r[2]));
    } else {
      for (const auto& q2 : sampling::interior_points(p.geometry, counts.pde, rs)) out.pde.push_back(make_point(q2[0], q2[1], 0.0));
    }
  }

  if (p.bc) {
    auto rs = root.split("points.bc");
    const std::size_t n = counts.bc.empty() ? 0 : counts.bc[0];
    if (p.spatial_dim == 1) {
      const auto ts = lhs(rs, n, {p.time});
      for (std::size_t i = 0; i < n; ++i) {
        out.bc.push_back(make_point(i % 2 == 0 ? p.box[0].first : p.box[0].second, 0.0, ts[i][0]));
      }
    } else if (p.temporal && p.periodic_bc) {
      const std::size_t nx = (n + 1) / 2;
      for (const auto& r : lhs(rs, nx, {p.box[1], p.time})) {
        auto c = make_point(p.box[0].first, r[0], r[1]);
        c.sites[1] = c.sites[0];
        c.sites[1].x[0] = p.box[0].second;
        out.bc.push_back(c);
      }
      for (const auto& r : lhs(rs, n - nx, {p.box[0], p.time})) {
        auto c = make_point(r[0], p.box[1].first, r[1]);
        c.sites[1] = c.sites[0];
        c.sites[1].x[1] = p.box[1].second;
        out.bc.push_back(c);
      }
    } else if (p.temporal) {
      const auto& g = p.geometry;
      const double w = g.x1 - g.x0, h = g.y1 - g.y0;
      for (const auto& r : lhs(rs, n, {{0.0, 2.0 * (w + h)}, p.time})) {
        double s = r[0];
        double x, y;
        if (s < w) {
          x = g.x0 + s, y = g.y0;
        } else if ((s -= w) < h) {
          x = g.x1, y = g.y0 + s;
        } else if ((s -= h) < w) {
          x = g.x1 - s, y = g.y1;
        } else {
          s -= w;
          x = g.x0, y = g.y1 - std::min(s, h);
        }
        out.bc.push_back(make_point(x, y, r[1]));
      }
    } else {
      for (const auto& b : sampling::boundary_points(p.geometry, counts.bc, rs, true))
        out.bc.push_back(make_point(b.x[0], b.x[1], 0.0, b.component));
    }
  }
  return out;
}

EvalGrid make_eval_grid(const PdeProblem& p, const GridSpec& spec) {
  EvalGrid g;
  if (p.spatial_dim == 1) {
    const double len = p.box[0].second - p.box[0].first;
    const double waves = p.w_char[0] * len / (2.0 * kPi);
    g.nx = spec.nx ? spec.nx : std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil(8.0 * waves)) + 1);
    g.nt = spec.nt ? spec.nt : 101;
    g.ny = 1;
  } else {
    g.nx = spec.nx ? spec.nx : (p.temporal ? 100 : 200);
    g.ny = spec.ny ? spec.ny : (p.temporal ? 100 : 200);
    g.nt = p.temporal ? (spec.nt ? spec.nt : 11) : 1;
  }
  if (g.nx < 2 || (p.spatial_dim == 2 && g.ny < 2) || (p.temporal && g.nt < 2)) {
    throw InvalidInput("make_eval_grid: every grid axis needs at least 2 points");
  }
  const auto gx = numerics::linspace(p.box[0].first, p.box[0].second, g.nx);
  const auto gy = p.spatial_dim == 2 ? numerics::linspace(p.box[1].first, p.box[1].second, g.ny) : std::vector<double>{0.0};
  const auto gt = p.temporal ? numerics::linspace(p.time.first, p.time.second, g.nt) : std::vector<double>{0.0};
  for (double t : gt)
    for (double y : gy)
      for (double x : gx) {
        const double pt[2] = {x, y};
        if (!p.valid_point(std::span<const double>(pt, p.spatial_dim))) continue;
        Site s;
        s.x = {x, y, 0.0};
        s.t = t;
        g.sites.push_back(s);
      }
  return g;
}

double rel_l2(std::span<const double> predicted, std::span<const double> reference) {
  if (predicted.size() != reference.size()) throw InvalidInput("rel_l2: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0) throw UndefinedMetric("rel_l2: reference has zero norm");
  return std::sqrt(num / den);
}

double max_abs_error(std::span<const double> predicted, std::span<const double> reference) {
  if (predicted.size() != reference.size()) throw InvalidInput("max_abs_error: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) m = std::max(m, std::abs(predicted[i] - reference[i]));
  return m;
}

std::vector<double> predict(const model::FieldModel& m, std::span<const Site> sites, int field) {
  constexpr std::size_t kBatch = 512;
  std::vector<double> out(sites.size());
  std::vector<double> values;
  const DerivSpec spec{field, {0, 0, 0}, 0};
  for (std::size_t i = 0; i < sites.size(); i += kBatch) {
    const std::size_t n = std::min(kBatch, sites.size() - i);
    m.forward(sites.subspan(i, n), std::span(&spec, 1), values);
    std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return out;
}

std::vector<double> exact_values(const PdeProblem& p, std::span<const Site> sites, int field) {
  std::vector<double> out(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) out[i] = p.exact_value(field, sites[i].x, sites[i].t);
  return out;
}

ErrorMetrics field_metrics(const PdeProblem& p, int field, std::span<const double> predicted, std::span<const double> reference) {
  std::vector<double> pred(predicted.begin(), predicted.end());
  if (p.gauge_field[field] && !pred.empty()) {
    double shift = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) shift += pred[i] - reference[i];
    shift /= static_cast<double>(pred.size());
    for (double& v : pred) v -= shift;
  }
  ErrorMetrics e;
  e.max_abs = max_abs_error(pred, reference);
  try {
    e.rel_l2 = rel_l2(pred, reference);
  } catch (const UndefinedMetric&) {
    e.rel_l2 = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

std::vector<ErrorMetrics> evaluate_metrics(const model::FieldModel& m, const PdeProblem& p, const EvalGrid& grid) {
  std::vector<ErrorMetrics> out;
  for (int f = 0; f < p.field_count(); ++f) {
    const auto pred = predict(m, grid.sites, f);
    const auto ref = exact_values(p, grid.sites, f);
    out.push_back(field_metrics(p, f, pred, ref));
  }
  return out;
}

}  // namespace svsnn::problems
