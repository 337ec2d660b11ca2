#pragma once

#include "prdl/types.hpp"

namespace prdl {

// Complex soft-thresholding: x / |x| * max(|x| - t, 0).
Complex soft_threshold(Complex x, double t);

// Minimizer of the scalar LASSO  curvature/2 |z - z0|^2 + Re(conj(g)(z - z0)) + t |z|,
// i.e. S_t(curvature * z0 - g) / curvature; zero when the curvature vanishes.
Complex scalar_lasso(double curvature, Complex z0, Complex g, double t);

}  // namespace prdl
