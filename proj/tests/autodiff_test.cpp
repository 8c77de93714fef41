#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "svsnn/autodiff/dual.hpp"
#include "svsnn/autodiff/tape.hpp"
#include "svsnn/error.hpp"
#include "svsnn/numerics/random.hpp"

using namespace svsnn;
using namespace svsnn::autodiff;

TEST(Backward, Square) {
  Tape t;
  Var th = t.parameter(3.0);
  const auto g = t.backward(th * th);
  EXPECT_DOUBLE_EQ(g[0], 6.0);
}

TEST(Backward, TanhAtZero) {
  Tape t;
  Var th = t.parameter(0.0);
  EXPECT_DOUBLE_EQ(t.backward(tanh(th))[0], 1.0);
}

TEST(Backward, MatchesFiniteDifference) {
  auto f = [](auto a, auto b) { return a * sin(b) + b * b; };
  numerics::RandomSource rs(5);
  const double x = numerics::draw_uniform(rs, -2, 2);
  const double y = numerics::draw_uniform(rs, -2, 2);
  Tape t;
  const Var px = t.parameter(x);
  const Var py = t.parameter(y);
  const auto g = t.backward(f(px, py));
  const double h = 1e-5;
  const double fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
  const double fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
  EXPECT_NEAR(g[0], fx, 1e-6 * std::max(1.0, std::abs(fx)));
  EXPECT_NEAR(g[1], fy, 1e-6 * std::max(1.0, std::abs(fy)));
}

TEST(Backward, RequiresEvaluatedTape) {
  Tape t;
  Var x = t.parameter(1.0);
  Var y = sin(x);
  t.set_leaf(x, 2.0);
  EXPECT_THROW(t.backward(y), StateError);
  t.forward();
  EXPECT_NEAR(t.value(y), std::sin(2.0), 1e-15);
  EXPECT_NEAR(t.backward(y)[0], std::cos(2.0), 1e-15);
}

TEST(Backward, AdjointBeforeBackwardIsStateError) {
  Tape t;
  Var x = t.parameter(1.0);
  EXPECT_THROW(t.adjoint(x), StateError);
}

TEST(Tape, DivisionByZeroAndPowDomain) {
  Tape t;
  Var x = t.parameter(0.0);
  EXPECT_THROW(Var(1.0) / x, EvaluationError);
  Var y = t.parameter(-1.0);
  EXPECT_THROW(pow(y, 0.5), EvaluationError);
  Var z = t.parameter(2.0);
  Var q = Var(1.0) / z;
  t.set_leaf(z, 0.0);
  EXPECT_THROW(t.forward(), EvaluationError);
  (void)q;
}

TEST(Tape, ValueMatchesDirectComputation) {
  Tape t;
  const double a = 0.7, b = -1.3;
  Var x = t.parameter(a);
  Var y = t.parameter(b);
  Var r = exp(x) * cos(y) / (Var(2.0) + tanh(x * y)) - pow(x, 3.0);
  const double direct = std::exp(a) * std::cos(b) / (2.0 + std::tanh(a * b)) - std::pow(a, 3.0);
  EXPECT_NEAR(t.value(r), direct, 4 * std::numeric_limits<double>::epsilon() * std::abs(direct));
}

TEST(Tape, OnlyTanhActivation) {
  EXPECT_EQ(parse_activation("tanh"), Activation::Tanh);
  EXPECT_THROW(parse_activation("relu"), InvalidInput);
  EXPECT_THROW(parse_activation("sigmoid"), InvalidInput);
}

namespace {

// Random composition of the supported primitives, reproducible per seed.
Var random_expression(Var x, Var y, numerics::RandomSource& rs, int depth) {
  if (depth == 0) return rs.next_below(2) ? x : y;
  const Var a = random_expression(x, y, rs, depth - 1);
  switch (rs.next_below(9)) {
    case 0: return a + random_expression(x, y, rs, depth - 1);
    case 1: return a - random_expression(x, y, rs, depth - 1);
    case 2: return a * random_expression(x, y, rs, depth - 1);
    case 3: return a / (Var(2.5) + sin(random_expression(x, y, rs, depth - 1)));
    case 4: return sin(a);
    case 5: return cos(a);
    case 6: return tanh(a);
    case 7: return exp(Var(0.3) * a);
    default: return pow(Var(1.5) + tanh(a), 2.5);
  }
}

double eval_expression(double xv, double yv, std::uint64_t seed) {
  Tape t;
  numerics::RandomSource rs(seed);
  Var x = t.parameter(xv);
  Var y = t.parameter(yv);
  return random_expression(x, y, rs, 4).value;
}

}  // namespace

TEST(Backward, RandomCompositionsMatchFiniteDifferences) {
  numerics::RandomSource pts(77);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double x = numerics::draw_uniform(pts, -2, 2);
    const double y = numerics::draw_uniform(pts, -2, 2);
    Tape t;
    numerics::RandomSource rs(seed);
    Var vx = t.parameter(x);
    Var vy = t.parameter(y);
    const auto g = t.backward(random_expression(vx, vy, rs, 4));
    const double h = 1e-5;
    const double fx = (eval_expression(x + h, y, seed) - eval_expression(x - h, y, seed)) / (2 * h);
    const double fy = (eval_expression(x, y + h, seed) - eval_expression(x, y - h, seed)) / (2 * h);
    EXPECT_NEAR(g[0], fx, 1e-6 * std::max(1.0, std::abs(fx))) << "seed " << seed;
    EXPECT_NEAR(g[1], fy, 1e-6 * std::max(1.0, std::abs(fy))) << "seed " << seed;
  }
}

TEST(Backward, GradientOfSumIsSumOfGradients) {
  Tape t;
  Var a = t.parameter(0.4);
  Var b = t.parameter(-0.9);
  Var f = sin(a) * b;
  Var g = tanh(a * b) + exp(b);
  const auto gf = t.backward(f);
  const auto gg = t.backward(g);
  const auto gs = t.backward(f + g);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(gs[i], gf[i] + gg[i], 1e-15);
}

TEST(InputDerivative, FirstAndSecondOrder) {
  Tape t;
  Var x = t.input(0.0);
  EXPECT_DOUBLE_EQ(input_derivative(t, tanh(x), x, 1), 1.0);
  Tape u;
  Var s = u.input(std::numbers::pi / 2);
  EXPECT_NEAR(input_derivative(u, sin(s), s, 2), -1.0, 1e-15);
  EXPECT_THROW(input_derivative(u, sin(s), s, 3), UnsupportedOrder);
  EXPECT_THROW(input_derivative(u, sin(s), s, 0), InvalidInput);
}

TEST(InputDerivative, ParameterGradientOfTimeDerivative) {
  // d/dw [d/dt (w tanh t)] = 1 - tanh^2 t
  Tape tape;
  Var w = tape.parameter(2.0);
  Var t = tape.input(0.5);
  Var f = w * tanh(t);
  const auto g = parameter_gradient_of_input_derivative(tape, f, t, 1);
  const double th = std::tanh(0.5);
  EXPECT_NEAR(g[0], 1.0 - th * th, 1e-14);
  // Finite-difference oracle on the parameter.
  auto dfdt = [](double wv) {
    Tape tp;
    Var ww = tp.parameter(wv);
    Var tt = tp.input(0.5);
    return input_derivative(tp, ww * tanh(tt), tt, 1);
  };
  const double h = 1e-5;
  EXPECT_NEAR(g[0], (dfdt(2.0 + h) - dfdt(2.0 - h)) / (2 * h), 1e-8);
}

TEST(InputDerivative, ForwardOverReverseMatchesReverseOverForward) {
  numerics::RandomSource rs(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double wv = numerics::draw_uniform(rs, -2, 2);
    const double bv = numerics::draw_uniform(rs, -2, 2);
    const double tv = numerics::draw_uniform(rs, -2, 2);
    auto build = [&](auto w, auto b, auto t) { return tanh(w * t + b) * sin(w * t) + exp(Var(0.2) * b * t); };
    // Forward over reverse.
    Tape tape;
    Var w = tape.parameter(wv);
    Var b = tape.parameter(bv);
    Var t = tape.input(tv);
    for (int order = 1; order <= 2; ++order) {
      const auto fr = parameter_gradient_of_input_derivative(tape, build(w, b, t), t, order);
      // Reverse over forward: the dual tangent lives on a second tape.
      Tape rf;
      Var w2 = rf.parameter(wv);
      Var b2 = rf.parameter(bv);
      using D = Dual<Dual<Var>>;
      D td(Dual<Var>(Var(tv), Var(order == 2 ? 1.0 : 0.0)), Dual<Var>(Var(1.0), Var(0.0)));
      D wd{Dual<Var>(w2)};
      D bd{Dual<Var>(b2)};
      const D y = tanh(wd * td + bd) * sin(wd * td) + exp(D(0.2) * bd * td);
      const Var target = order == 1 ? y.d.v : y.d.d;
      const auto rg = rf.backward(target);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(fr[i], rg[i], 1e-10 * std::max(1.0, std::abs(rg[i])));
    }
  }
}

TEST(Dual, SecondDerivativeOfProduct) {
  // f = x^2 sin x, f'' = 2 sin x + 4x cos x - x^2 sin x
  const double x = 0.8;
  Dual2 d(Dual1(x, 1.0), Dual1(1.0, 0.0));
  const Dual2 f = d * d * sin(d);
  EXPECT_NEAR(f.d.d, 2 * std::sin(x) + 4 * x * std::cos(x) - x * x * std::sin(x), 1e-14);
  EXPECT_NEAR(f.d.v, 2 * x * std::sin(x) + x * x * std::cos(x), 1e-14);
  EXPECT_THROW(Dual1(1.0) / Dual1(0.0), EvaluationError);
}
