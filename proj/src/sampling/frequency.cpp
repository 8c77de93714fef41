#include "svsnn/sampling/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::sampling {

FrequencyPlan FrequencyPlan::defaults(double w_char, int k) {
  FrequencyPlan p;
  p.w_char = w_char;
  p.w_min = std::min(1.0, w_char);
  p.w_max = 2.0 * w_char;
  p.sigma = w_char / std::numbers::pi;
  p.k = k;
  return p;
}

void FrequencyPlan::validate() const {
  if (k < 4) throw InvalidInput("frequency plan: K must be at least 4, got " + std::to_string(k));
  if (!(w_min > 0.0 && w_min <= w_char && w_char <= w_max) || !std::isfinite(w_max)) {
    throw InvalidInput("frequency plan: need 0 < w_min <= w_char <= w_max");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("frequency plan: sigma must be >= 0");
}

BandCounts band_counts(int k) {
  if (k < 4) throw InvalidInput("frequency plan: K must be at least 4, got " + std::to_string(k));
  return {k / 4, k - 2 * (k / 4), k / 4};
}

std::vector<double> three_level_frequencies(const FrequencyPlan& plan, numerics::RandomSource& rs) {
  plan.validate();
  const BandCounts bands = band_counts(plan.k);
  std::vector<double> w;
  w.reserve(plan.k);
  for (double v : numerics::linspace(plan.w_min, plan.w_char, bands.low)) w.push_back(v);
  for (int i = 0; i < bands.middle; ++i) {
    w.push_back(std::clamp(numerics::draw_gaussian(rs, plan.w_char, plan.sigma), plan.w_min, plan.w_max));
  }
  for (int i = 0; i < bands.high; ++i) w.push_back(numerics::draw_uniform(rs, plan.w_char, plan.w_max));
  return w;
}

double estimate_characteristic_frequency(std::span<const double> samples, double span) {
  const std::size_t n = samples.size();
  if (n < 64) throw InvalidInput("estimate_characteristic_frequency: need at least 64 samples");
  if (!(span > 0.0)) throw InvalidInput("estimate_characteristic_frequency: span must be positive");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double s : samples) spread = std::max(spread, std::abs(s - mean));
  if (spread <= 1e-14 * std::max(1.0, std::abs(mean))) {
    throw NoDominantFrequency("estimate_characteristic_frequency: signal is constant");
  }
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t m = 1; m <= n / 2; ++m) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(m * i % n) / static_cast<double>(n);
      re += samples[i] * std::cos(ang);
      im -= samples[i] * std::sin(ang);
    }
    const double mag = std::hypot(re, im);
    if (mag > best_mag) {
      best_mag = mag;
      best = m;
    }
  }
  return 2.0 * std::numbers::pi * static_cast<double>(best) / span;
}

double characteristic_frequency(std::span<const double> components) {
  double w = 0.0;
  for (double c : components) {
    if (std::isfinite(c) && c > w) w = c;
  }
  if (w <= 0.0) throw InvalidInput("characteristic_frequency: no positive component supplied");
  return w;
}

}  // namespace svsnn::sampling
