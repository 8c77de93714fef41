#include <algorithm>
#include <cmath>
#include <cstddef>

#include "svsnn/spectral/feature.hpp"

namespace svsnn::spectral {

// Built with vector math enabled. Data passes through fixed aligned buffers so
// the split between vector lanes and scalar tail never depends on the caller's
// addresses, which keeps results bit-reproducible.
void sincos_scaled(std::span<const double> w, double x, std::span<double> s, std::span<double> c) {
  constexpr std::size_t kChunk = 64;
  alignas(64) double arg[kChunk];
  alignas(64) double so[kChunk];
  alignas(64) double co[kChunk];
  for (std::size_t lo = 0; lo < w.size(); lo += kChunk) {
    const std::size_t n = std::min(kChunk, w.size() - lo);
    std::copy_n(w.data() + lo, n, arg);
    const std::size_t padded = (n + 7) & ~std::size_t{7};
    std::fill(arg + n, arg + padded, 0.0);
    // Separate loops: a shared argument would be fused into scalar sincos.
#pragma omp simd aligned(arg, so : 64)
    for (std::size_t k = 0; k < padded; ++k) so[k] = std::sin(arg[k] * x);
#pragma omp simd aligned(arg, co : 64)
    for (std::size_t k = 0; k < padded; ++k) co[k] = std::cos(arg[k] * x);
    std::copy_n(so, n, s.data() + lo);
    std::copy_n(co, n, c.data() + lo);
  }
}

}  // namespace svsnn::spectral
