#pragma once

#include <array>
#include <vector>

namespace prdl {

// q(g) = c[0] + c[1] g + c[2] g^2 + c[3] g^3 + c[4] g^4
struct Quartic {
  std::array<double, 5> c{};

  double operator()(double g) const;
  double derivative(double g) const;
};

// Real roots of c[0] + c[1] x + ... + c[n] x^n for n <= 3. Negligible leading
// coefficients (relative to the largest one) reduce the degree; the cubic is
// solved in closed form with a companion-matrix eigenvalue fallback.
std::vector<double> real_roots(std::vector<double> coeffs);

// Minimizer of q over [0, 1]: stationary points inside the interval plus both
// endpoints are compared and ties go to the smallest argument.
double minimize_on_unit_interval(const Quartic& q);

}  // namespace prdl
