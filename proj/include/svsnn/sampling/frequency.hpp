#pragma once

#include <span>
#include <vector>

#include "svsnn/numerics/random.hpp"

namespace svsnn::sampling {

struct FrequencyPlan {
  double w_char = 1.0;  // rad per unit length
  double sigma = 1.0;   // stddev of the middle band
  double w_min = 1.0;
  double w_max = 2.0;
  int k = 4;

  // w_max = 2 w_char, w_min = min(1, w_char), sigma = w_char / pi.
  static FrequencyPlan defaults(double w_char, int k);
  // Throws InvalidInput unless 0 < w_min <= w_char <= w_max, sigma >= 0, K >= 4.
  void validate() const;
};

// floor(K/4) values linearly spaced on [w_min, w_char], K - 2 floor(K/4)
// Gaussian(w_char, sigma^2) draws clamped to [w_min, w_max], then floor(K/4)
// uniform draws on [w_char, w_max].
std::vector<double> three_level_frequencies(const FrequencyPlan& plan, numerics::RandomSource& rs);

struct BandCounts {
  int low = 0;
  int middle = 0;
  int high = 0;
};
BandCounts band_counts(int k);

// Dominant angular frequency 2 pi m / span of uniformly spaced samples
// (span = sample count x spacing),
// where m maximises |DFT_m| over m >= 1. Throws NoDominantFrequency for a
// constant signal and InvalidInput for fewer than 64 samples.
double estimate_characteristic_frequency(std::span<const double> samples, double span);

// Largest of the known per-component frequencies (non-positive entries ignored).
double characteristic_frequency(std::span<const double> components);

}  // namespace svsnn::sampling
