#pragma once

#include <cstdint>
#include <random>

#include "prdl/types.hpp"

namespace prdl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive child seeds (master -> trial -> init).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// i.i.d. standard complex Gaussian entries, E|x|^2 = 1.
CMatrix complex_gaussian(Index rows, Index cols, Rng& rng);

// Complex Gaussian columns normalized to unit norm.
CMatrix unit_norm_columns(Index rows, Index cols, Rng& rng);

}  // namespace prdl
