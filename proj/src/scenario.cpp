#include "prdl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "prdl/random.hpp"

namespace prdl {

namespace {

enum StreamTag : std::uint64_t { kSpatial = 1, kDictionary, kSupport, kCodes, kNoise };

std::shared_ptr<const MixingOperator> make_operator(const ScenarioParams& p) {
  Rng rng(mix_seed(p.seed, kSpatial));
  switch (p.mixing_case) {
    case 1:
      return std::make_shared<MixingOperator>(MixingOperator::time_invariant(
          complex_gaussian(p.M1, p.N, rng), CMatrix::Identity(p.I, p.I)));
    case 2:
      return std::make_shared<MixingOperator>(
          MixingOperator::time_invariant(complex_gaussian(p.M1, p.N, rng), stft_matrix(p.I)));
    case 3: {
      std::vector<CMatrix> A;
      A.reserve(static_cast<size_t>(p.I));
      for (Index i = 0; i < p.I; ++i) {
        A.push_back(complex_gaussian(p.M1, p.N, rng));
      }
      return std::make_shared<MixingOperator>(MixingOperator::snapshot_selectors(std::move(A)));
    }
    default:
      throw ParameterError("mixing case must be 1, 2 or 3");
  }
}

}  // namespace

void ScenarioParams::validate() const {
  if (mixing_case < 1 || mixing_case > 3) {
    throw ParameterError("mixing case must be 1, 2 or 3");
  }
  if (N < 1 || M1 < 1 || I < 2) {
    throw ParameterError("N, M1 must be positive and I at least 2");
  }
  if (P < 1 || P >= I) {
    throw ParameterError("dictionary size must satisfy 1 <= P < I");
  }
  if (L < 1 || L > P) {
    throw ParameterError("sparsity must satisfy 1 <= L <= P");
  }
  if (mixing_case == 2 && I % 4 != 0) {
    throw ParameterError("STFT mixing needs I divisible by 4");
  }
  if (std::isnan(snr_db)) {
    throw ParameterError("snr_db is NaN");
  }
}

CMatrix stft_matrix(Index I) {
  if (I < 4 || I % 4 != 0) {
    throw ParameterError("STFT matrix needs I divisible by 4");
  }
  const Index hop = I / 4;
  const Index window = I / 2;
  CMatrix B = CMatrix::Zero(I, 5 * I);
  for (Index f = 0; f < 5; ++f) {
    const Index start = (f - 1) * hop;
    for (Index k = 0; k < I; ++k) {
      for (Index n = std::max<Index>(start, 0); n < std::min(start + window, I); ++n) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) *
                             static_cast<double>(n - start) / static_cast<double>(I);
        B(n, f * I + k) = std::polar(1.0, angle);
      }
    }
  }
  return B;
}

Scenario generate_scenario(const ScenarioParams& p) {
  p.validate();
  auto op = make_operator(p);

  Rng drng(mix_seed(p.seed, kDictionary));
  CMatrix D = complex_gaussian(p.N, p.P, drng);
  if (p.normalize_dictionary) {
    D.colwise().normalize();
  }

  Rng srng(mix_seed(p.seed, kSupport));
  Rng crng(mix_seed(p.seed, kCodes));
  CMatrix Z = CMatrix::Zero(p.P, p.I);
  std::vector<Index> atoms(static_cast<size_t>(p.P));
  for (Index i = 0; i < p.I; ++i) {
    std::iota(atoms.begin(), atoms.end(), Index{0});
    // Partial Fisher-Yates: the first L entries are a uniform L-subset.
    for (Index j = 0; j < p.L; ++j) {
      std::uniform_int_distribution<Index> pick(j, p.P - 1);
      std::swap(atoms[static_cast<size_t>(j)], atoms[static_cast<size_t>(pick(srng))]);
    }
    const CMatrix vals = complex_gaussian(p.L, 1, crng);
    for (Index j = 0; j < p.L; ++j) {
      Z(atoms[static_cast<size_t>(j)], i) = vals(j, 0);
    }
  }

  CMatrix X = D * Z;
  const RMatrix mag = op->apply(X).cwiseAbs();
  RMatrix noise = RMatrix::Zero(mag.rows(), mag.cols());
  if (std::isfinite(p.snr_db)) {
    const double var = mag.squaredNorm() / (static_cast<double>(mag.size()) *
                                            std::pow(10.0, p.snr_db / 10.0));
    Rng nrng(mix_seed(p.seed, kNoise));
    std::normal_distribution<double> g(0.0, std::sqrt(var));
    for (Index j = 0; j < noise.cols(); ++j) {
      for (Index i = 0; i < noise.rows(); ++i) {
        noise(i, j) = g(nrng);
      }
    }
  }
  RMatrix Y = (mag + noise).cwiseMax(0.0);
  ProblemInstance inst(std::move(Y), std::move(op), p.P);
  return Scenario{p, std::move(inst), std::move(D), std::move(Z), std::move(X), std::move(noise)};
}

double realized_snr_db(const Scenario& s) {
  const double n2 = s.noise.squaredNorm();
  if (n2 == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double sig = s.inst.op().apply(s.X_true).squaredNorm();
  return 10.0 * std::log10(sig / n2);
}

}  // namespace prdl
