#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "svsnn/autodiff/tape.hpp"
#include "svsnn/error.hpp"
#include "svsnn/numerics/random.hpp"
#include "svsnn/spectral/feature.hpp"

using namespace svsnn;
using namespace svsnn::spectral;
constexpr double kPi = std::numbers::pi;

namespace {

FourierFeature1D random_feature(numerics::RandomSource& rs, std::size_t k, double wmax = 10.0) {
  FourierFeature1D f;
  for (std::size_t i = 0; i < k; ++i) {
    f.a.push_back(numerics::draw_uniform(rs, -1, 1));
    f.b.push_back(numerics::draw_uniform(rs, -1, 1));
    f.w.push_back(numerics::draw_uniform(rs, -wmax, wmax));
  }
  f.beta = numerics::draw_uniform(rs, -1, 1);
  return f;
}

double direct_sum(const FourierFeature1D& f, double x) {
  double s = f.beta;
  for (std::size_t k = 0; k < f.size(); ++k) s += f.a[k] * std::sin(f.w[k] * x) + f.b[k] * std::cos(f.w[k] * x);
  return s;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST(Eval1d, SingleSine) {
  FourierFeature1D f{{1}, {0}, {kPi}, 0};
  EXPECT_NEAR(eval1d(f, 0.5), 1.0, 1e-15);
}

TEST(Eval1d, BiasOnly) {
  FourierFeature1D f{{0}, {0}, {7}, 2.5};
  EXPECT_DOUBLE_EQ(eval1d(f, -3.3), 2.5);
  EXPECT_DOUBLE_EQ(deriv1d(f, 0.4, 2), 0.0);
  EXPECT_DOUBLE_EQ(deriv1d(f, 0.4, 1), 0.0);
}

TEST(Eval1d, DirectSumOracle) {
  numerics::RandomSource rs(1);
  const auto f = random_feature(rs, 3);
  EXPECT_NEAR(eval1d(f, 0.37), direct_sum(f, 0.37), 1e-15);
}

TEST(Eval1d, RejectsMalformedFeature) {
  FourierFeature1D f{{1, 2}, {0}, {1}, 0};
  EXPECT_THROW(eval1d(f, 0.0), InvalidInput);
  FourierFeature1D g{{}, {}, {}, 0};
  EXPECT_THROW(eval1d(g, 0.0), InvalidInput);
}

TEST(Deriv1d, SecondOrderOfSine) {
  FourierFeature1D f{{1}, {0}, {kPi}, 0};
  EXPECT_NEAR(deriv1d(f, 0.5, 2), -kPi * kPi, 1e-12);
  EXPECT_THROW(deriv1d(f, 0.5, 3), UnsupportedOrder);
  EXPECT_THROW(deriv1d(f, 0.5, -1), UnsupportedOrder);
}

TEST(Deriv1d, FirstOrderMatchesFiniteDifference) {
  numerics::RandomSource rs(2);
  const auto f = random_feature(rs, 6);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const double x = numerics::draw_uniform(rs, -1, 1);
    const double fd = (eval1d(f, x + h) - eval1d(f, x - h)) / (2 * h);
    EXPECT_LT(rel_err(deriv1d(f, x, 1), fd), 1e-6);
    const double fd2 = (deriv1d(f, x + h, 1) - deriv1d(f, x - h, 1)) / (2 * h);
    EXPECT_LT(rel_err(deriv1d(f, x, 2), fd2), 1e-6);
  }
}

TEST(ParamGrads1d, SimpleIdentities) {
  numerics::RandomSource rs(3);
  const auto f = random_feature(rs, 4);
  for (int order = 0; order <= 2; ++order) {
    const auto g = param_grads1d(f, 0.3, order);
    EXPECT_DOUBLE_EQ(g.beta, order == 0 ? 1.0 : 0.0);
  }
  const auto g0 = param_grads1d(f, 0.0, 0);
  for (double v : g0.a) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(param_grads1d(f, 0.0, 3), UnsupportedOrder);
}

TEST(ParamGrads1d, MatchesFiniteDifferences) {
  numerics::RandomSource rs(4);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_feature(rs, 5);
    const double x = numerics::draw_uniform(rs, -1, 1);
    for (int order = 0; order <= 2; ++order) {
      const auto g = param_grads1d(f, x, order);
      for (std::size_t k = 0; k < f.size(); ++k) {
        for (int which = 0; which < 3; ++which) {
          auto fp = f;
          auto fm = f;
          auto& vp = which == 0 ? fp.a : which == 1 ? fp.b : fp.w;
          auto& vm = which == 0 ? fm.a : which == 1 ? fm.b : fm.w;
          vp[k] += h;
          vm[k] -= h;
          const double fd = (deriv1d(fp, x, order) - deriv1d(fm, x, order)) / (2 * h);
          const double got = which == 0 ? g.a[k] : which == 1 ? g.b[k] : g.w[k];
          EXPECT_LT(rel_err(got, fd), 1e-6) << "order " << order << " param " << which << " k " << k;
        }
      }
    }
  }
}

TEST(ParamGrads1d, AgreesWithTapedReplica) {
  numerics::RandomSource rs(5);
  const auto f = random_feature(rs, 4);
  const double x = 0.61;
  using autodiff::Var;
  for (int order = 0; order <= 2; ++order) {
    autodiff::Tape t;
    std::vector<Var> a, b, w;
    for (std::size_t k = 0; k < f.size(); ++k) a.push_back(t.parameter(f.a[k]));
    for (std::size_t k = 0; k < f.size(); ++k) b.push_back(t.parameter(f.b[k]));
    for (std::size_t k = 0; k < f.size(); ++k) w.push_back(t.parameter(f.w[k]));
    Var beta = t.parameter(f.beta);
    Var xv = t.input(x);
    Var phi = beta;
    for (std::size_t k = 0; k < f.size(); ++k) phi = phi + a[k] * sin(w[k] * xv) + b[k] * cos(w[k] * xv);
    std::vector<double> tg;
    if (order == 0) tg = t.backward(phi);
    else tg = autodiff::parameter_gradient_of_input_derivative(t, phi, xv, order);
    const auto g = param_grads1d(f, x, order);
    const std::size_t k = f.size();
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_LT(rel_err(g.a[i], tg[i]), 1e-10);
      EXPECT_LT(rel_err(g.b[i], tg[k + i]), 1e-10);
      EXPECT_LT(rel_err(g.w[i], tg[2 * k + i]), 1e-10);
    }
    EXPECT_LT(rel_err(g.beta, tg[3 * k]), 1e-10);
  }
}

TEST(Mode, BiasOnlyProduct) {
  SeparableMode m{{FourierFeature1D{{0}, {0}, {1}, 2}, FourierFeature1D{{0}, {0}, {1}, 3}}};
  const double x[] = {0.1, 0.2};
  EXPECT_DOUBLE_EQ(eval_mode(m, x), 6.0);
}

TEST(Mode, OneDimensionReducesToEval1d) {
  numerics::RandomSource rs(6);
  const auto f = random_feature(rs, 3);
  SeparableMode m{{f}};
  const double x[] = {0.42};
  EXPECT_EQ(eval_mode(m, x), eval1d(f, 0.42));
}

TEST(Mode, DirectProductOracle) {
  numerics::RandomSource rs(7);
  SeparableMode m{{random_feature(rs, 3), random_feature(rs, 4)}};
  const double x[] = {0.3, -0.7};
  EXPECT_EQ(eval_mode(m, x), eval1d(m.directions[0], 0.3) * eval1d(m.directions[1], -0.7));
  const int zero[] = {0, 0};
  EXPECT_EQ(mixed_partial(m, x, zero), eval_mode(m, x));
}

TEST(Mode, MixedPartialAnalytic) {
  // u = sin(pi x) cos(pi y)
  SeparableMode m{{FourierFeature1D{{1}, {0}, {kPi}, 0}, FourierFeature1D{{0}, {1}, {kPi}, 0}}};
  const double x[] = {0.5, 0.0};
  const int p[] = {2, 0};
  EXPECT_NEAR(mixed_partial(m, x, p), -kPi * kPi, 1e-12);
  const int bad[] = {3, 0};
  EXPECT_THROW(mixed_partial(m, x, bad), UnsupportedOrder);
}

TEST(Mode, MixedPartialMatchesNestedFiniteDifference) {
  numerics::RandomSource rs(8);
  SeparableMode m{{random_feature(rs, 3, 5), random_feature(rs, 3, 5)}};
  const double h = 1e-4;
  const double x = 0.21, y = -0.33;
  auto u = [&](double a, double b) {
    const double p[] = {a, b};
    return eval_mode(m, p);
  };
  const double fd = (u(x + h, y + h) - u(x + h, y - h) - u(x - h, y + h) + u(x - h, y - h)) / (4 * h * h);
  const double pt[] = {x, y};
  const int p[] = {1, 1};
  EXPECT_LT(rel_err(mixed_partial(m, pt, p), fd), 1e-5);
}

TEST(Mode, LaplacianOfSharedFrequency) {
  const double w = 3.0;
  SeparableMode m{{FourierFeature1D{{0.7}, {0.2}, {w}, 0}, FourierFeature1D{{-0.4}, {1.1}, {w}, 0}}};
  const double x[] = {0.37, -0.81};
  const int pxx[] = {2, 0};
  const int pyy[] = {0, 2};
  const double lap = mixed_partial(m, x, pxx) + mixed_partial(m, x, pyy);
  EXPECT_NEAR(lap, -2.0 * w * w * eval_mode(m, x), 1e-12);
}

// Property battery: closed forms against central differences over many
// random configurations.
TEST(AnalyticDerivatives, RandomConfigurations) {
  numerics::RandomSource rs(99);
  const double h = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_feature(rs, 1 + rs.next_below(6), 8.0);
    const double x = numerics::draw_uniform(rs, -1, 1);
    const int order = static_cast<int>(rs.next_below(2));
    const double fd = (deriv1d(f, x + h, order) - deriv1d(f, x - h, order)) / (2 * h);
    ASSERT_LT(rel_err(deriv1d(f, x, order + 1), fd), 1e-5) << "trial " << trial;
  }
}
