#include "svsnn/spectral/feature.hpp"

#include <cmath>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::spectral {

namespace {

void check_order(int order) {
  if (order < 0 || order > 2) {
    throw UnsupportedOrder("spatial derivative order must be 0, 1 or 2, got " + std::to_string(order));
  }
}

}  // namespace

void FourierFeature1D::validate() const {
  if (w.empty()) throw InvalidInput("FourierFeature1D: K must be at least 1");
  if (a.size() != w.size() || b.size() != w.size()) {
    throw InvalidInput("FourierFeature1D: a, b and w must have equal length");
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!std::isfinite(a[k]) || !std::isfinite(b[k]) || !std::isfinite(w[k])) {
      throw InvalidInput("FourierFeature1D: non-finite parameter at k=" + std::to_string(k));
    }
  }
  if (!std::isfinite(beta)) throw InvalidInput("FourierFeature1D: non-finite bias");
}

FeatureView FeatureView::of(const FourierFeature1D& f) {
  f.validate();
  return {f.a, f.b, f.w, f.beta};
}

FeatureView FeatureView::from_block(std::span<const double> block) {
  if (block.size() < 4 || (block.size() - 1) % 3 != 0) {
    throw InvalidInput("FeatureView: block length must be 3K+1");
  }
  const std::size_t k = (block.size() - 1) / 3;
  return {block.subspan(0, k), block.subspan(k, k), block.subspan(2 * k, k), block[3 * k]};
}

void feature_orders(const FeatureView& f, double x, int max_order, std::array<double, 3>& out,
                    std::span<double> s, std::span<double> c) {
  double v0 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  const std::size_t k_count = f.size();
  sincos_scaled(f.w, x, s, c);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double wk = f.w[k];
    const double sk = s[k];
    const double ck = c[k];
    const double a0 = f.a[k] * sk + f.b[k] * ck;
    v0 += a0;
    if (max_order >= 1) v1 += wk * (f.a[k] * ck - f.b[k] * sk);
    if (max_order >= 2) v2 -= wk * wk * a0;
  }
  out = {v0 + f.beta, v1, v2};
}

void accumulate_feature_grads(const FeatureView& f, double x, double g0, double g1, double g2,
                              std::span<const double> s, std::span<const double> c,
                              std::span<double> grad) {
  const std::size_t k_count = f.size();
  double* ga = grad.data();
  double* gb = ga + k_count;
  double* gw = gb + k_count;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double wk = f.w[k];
    const double sk = s[k];
    const double ck = c[k];
    const double a0 = f.a[k] * sk + f.b[k] * ck;
    const double a1 = f.a[k] * ck - f.b[k] * sk;
    const double w2 = wk * wk;
    ga[k] += g0 * sk + g1 * wk * ck - g2 * w2 * sk;
    gb[k] += g0 * ck - g1 * wk * sk - g2 * w2 * ck;
    gw[k] += g0 * x * a1 + g1 * (a1 - wk * x * a0) - g2 * (2.0 * wk * a0 + w2 * x * a1);
  }
  grad[3 * k_count] += g0;
}

double eval1d(const FourierFeature1D& f, double x) { return deriv1d(f, x, 0); }

double deriv1d(const FourierFeature1D& f, double x, int order) {
  check_order(order);
  const FeatureView v = FeatureView::of(f);
  std::vector<double> s(v.size());
  std::vector<double> c(v.size());
  std::array<double, 3> out{};
  feature_orders(v, x, order, out, s, c);
  return out[order];
}

FeatureGrad param_grads1d(const FourierFeature1D& f, double x, int order) {
  check_order(order);
  const FeatureView v = FeatureView::of(f);
  const std::size_t k = v.size();
  std::vector<double> s(k);
  std::vector<double> c(k);
  std::array<double, 3> unused{};
  feature_orders(v, x, 0, unused, s, c);
  std::vector<double> flat(3 * k + 1, 0.0);
  std::array<double, 3> g{};
  g[order] = 1.0;
  accumulate_feature_grads(v, x, g[0], g[1], g[2], s, c, flat);
  FeatureGrad out;
  out.a.assign(flat.begin(), flat.begin() + k);
  out.b.assign(flat.begin() + k, flat.begin() + 2 * k);
  out.w.assign(flat.begin() + 2 * k, flat.begin() + 3 * k);
  out.beta = flat[3 * k];
  return out;
}

double eval_mode(const SeparableMode& m, std::span<const double> x) {
  if (m.directions.empty()) throw InvalidInput("SeparableMode: dimension must be at least 1");
  if (x.size() != m.dimension()) throw InvalidInput("eval_mode: point dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < m.dimension(); ++j) p *= eval1d(m.directions[j], x[j]);
  return p;
}

double mixed_partial(const SeparableMode& m, std::span<const double> x, std::span<const int> orders) {
  if (m.directions.empty()) throw InvalidInput("SeparableMode: dimension must be at least 1");
  if (x.size() != m.dimension() || orders.size() != m.dimension()) {
    throw InvalidInput("mixed_partial: dimension mismatch");
  }
  for (int o : orders) check_order(o);
  double p = 1.0;
  for (std::size_t j = 0; j < m.dimension(); ++j) p *= deriv1d(m.directions[j], x[j], orders[j]);
  return p;
}

}  // namespace svsnn::spectral
