#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace svsnn::numerics {

// xoshiro256** seeded through SplitMix64. The integer stream is identical on
// every platform for a given seed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0);

  void reseed(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // 53-bit mantissa in [0, 1).
  double next_unit();
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  // Independent stream for a named purpose; see derive_seed.
  RandomSource split(std::string_view purpose) const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_[4] = {};
};

std::uint64_t splitmix64(std::uint64_t& state);

// Sub-seed rule: splitmix64 over (seed XOR fnv1a64(purpose)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

std::uint64_t fnv1a64(std::string_view bytes);

double draw_uniform(RandomSource& rs, double lo, double hi);
// Box-Muller; stddev == 0 returns mean without consuming draws.
double draw_gaussian(RandomSource& rs, double mean, double stddev);
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Fisher-Yates.
template <class T>
void shuffle(std::vector<T>& v, RandomSource& rs) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rs.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace svsnn::numerics
