#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace prdl {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (poles, non-finite values).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Invalid configuration or hyperparameter.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A solver run produced a non-finite objective.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) {
    throw DimensionError(what);
  }
}

// Trace inner product Re tr(A^H B).
inline double real_inner(const CMatrix& a, const CMatrix& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "inner product shape mismatch");
  using Flat = Eigen::Map<const Eigen::VectorXd>;
  return Flat(reinterpret_cast<const double*>(a.data()), 2 * a.size())
      .dot(Flat(reinterpret_cast<const double*>(b.data()), 2 * b.size()));
}

// |x|^2 without the hypot call behind std::norm.
inline double abs2(Complex x) { return x.real() * x.real() + x.imag() * x.imag(); }

inline double magnitude(Complex x) {
  const double n2 = abs2(x);
  return n2 > 1e-300 ? std::sqrt(n2) : std::abs(x);
}

// arg() with arg(0) := 0, returned as the unit phasor.
inline Complex unit_phase(Complex x) {
  const double m = magnitude(x);
  return m > 0.0 ? x / m : Complex(1.0, 0.0);
}

}  // namespace prdl
