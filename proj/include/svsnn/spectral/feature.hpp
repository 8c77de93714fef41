#pragma once

#include <array>
#include <span>
#include <vector>

namespace svsnn::spectral {

// phi(x) = sum_k [a_k sin(w_k x) + b_k cos(w_k x)] + beta
struct FourierFeature1D {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> w;
  double beta = 0.0;

  std::size_t size() const { return w.size(); }
  // Throws InvalidInput when the arrays disagree in length, are empty or hold
  // non-finite values.
  void validate() const;
};

// Non-owning view, used over flat parameter storage laid out as
// [a_0..a_{K-1}, b_0..b_{K-1}, w_0..w_{K-1}, beta].
struct FeatureView {
  std::span<const double> a;
  std::span<const double> b;
  std::span<const double> w;
  double beta = 0.0;

  static FeatureView of(const FourierFeature1D& f);
  static FeatureView from_block(std::span<const double> block);
  std::size_t size() const { return w.size(); }
};

struct FeatureGrad {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> w;
  double beta = 0.0;
};

double eval1d(const FourierFeature1D& f, double x);
// order 0, 1 or 2; anything else throws UnsupportedOrder.
double deriv1d(const FourierFeature1D& f, double x, int order);
FeatureGrad param_grads1d(const FourierFeature1D& f, double x, int order);

// Fills out[0..max_order] with phi, phi', phi'' at x and stores sin(w_k x),
// cos(w_k x) into s and c (each of length K).
// s[k] = sin(w[k] x), c[k] = cos(w[k] x), vectorized.
void sincos_scaled(std::span<const double> w, double x, std::span<double> s, std::span<double> c);

void feature_orders(const FeatureView& f, double x, int max_order, std::array<double, 3>& out,
                    std::span<double> s, std::span<double> c);

// Adds g0 * d(phi)/dtheta + g1 * d(phi')/dtheta + g2 * d(phi'')/dtheta into
// grad, which is a block in the same layout as FeatureView::from_block.
void accumulate_feature_grads(const FeatureView& f, double x, double g0, double g1, double g2,
                              std::span<const double> s, std::span<const double> c,
                              std::span<double> grad);

struct SeparableMode {
  std::vector<FourierFeature1D> directions;
  std::size_t dimension() const { return directions.size(); }
};

double eval_mode(const SeparableMode& m, std::span<const double> x);
// prod_j deriv1d(direction j, x_j, orders_j)
double mixed_partial(const SeparableMode& m, std::span<const double> x, std::span<const int> orders);

}  // namespace svsnn::spectral
