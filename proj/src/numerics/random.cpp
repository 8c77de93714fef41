#include "svsnn/numerics/random.hpp"

#include <cmath>
#include <numbers>

#include "svsnn/error.hpp"

namespace svsnn::numerics {

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  std::uint64_t s = seed ^ fnv1a64(purpose);
  return splitmix64(s);
}

RandomSource::RandomSource(std::uint64_t seed) { reseed(seed); }

void RandomSource::reseed(std::uint64_t seed) {
  seed_ = seed;
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t RandomSource::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomSource::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RandomSource::next_below(std::uint64_t n) {
  if (n == 0) throw InvalidInput("next_below: empty range");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

RandomSource RandomSource::split(std::string_view purpose) const {
  return RandomSource(derive_seed(seed_, purpose));
}

double draw_uniform(RandomSource& rs, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInput("draw_uniform: lo > hi");
  return lo + (hi - lo) * rs.next_unit();
}

double draw_gaussian(RandomSource& rs, double mean, double stddev) {
  if (!(stddev >= 0.0)) throw InvalidInput("draw_gaussian: negative stddev");
  if (stddev == 0.0) return mean;
  // 1 - u lies in (0, 1], keeping log finite.
  const double u1 = 1.0 - rs.next_unit();
  const double u2 = rs.next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) throw InvalidInput("linspace: n must be >= 1");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace svsnn::numerics
