#include "prdl/random.hpp"

#include <cmath>

namespace prdl {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

CMatrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMatrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      M(i, j) = Complex(re, im);
    }
  }
  return M;
}

CMatrix unit_norm_columns(Index rows, Index cols, Rng& rng) {
  CMatrix M = complex_gaussian(rows, cols, rng);
  for (Index j = 0; j < cols; ++j) {
    M.col(j).normalize();
  }
  return M;
}

}  // namespace prdl
