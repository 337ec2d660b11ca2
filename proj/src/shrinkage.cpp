#include "prdl/shrinkage.hpp"

#include <cmath>

namespace prdl {

Complex soft_threshold(Complex x, double t) {
  const double m = magnitude(x);
  if (m <= t) {
    return Complex(0.0, 0.0);
  }
  return x * ((m - t) / m);
}

Complex scalar_lasso(double curvature, Complex z0, Complex g, double t) {
  if (!(curvature > 0.0)) {
    return Complex(0.0, 0.0);
  }
  return soft_threshold(curvature * z0 - g, t) / curvature;
}

}  // namespace prdl
