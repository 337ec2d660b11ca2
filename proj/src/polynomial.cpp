#include "prdl/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace prdl {

namespace {

constexpr double kDegenerateLeading = 1e-14;

double eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    v = v * x + *it;
  }
  return v;
}

double eval_derivative(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t k = c.size() - 1; k >= 1; --k) {
    v = v * x + static_cast<double>(k) * c[k];
  }
  return v;
}

void polish(const std::vector<double>& c, double& x) {
  for (int it = 0; it < 3; ++it) {
    const double d = eval_derivative(c, x);
    if (d == 0.0) {
      return;
    }
    const double step = eval(c, x) / d;
    if (!std::isfinite(step)) {
      return;
    }
    const double next = x - step;
    if (std::abs(eval(c, next)) > std::abs(eval(c, x))) {
      return;
    }
    x = next;
  }
}

std::vector<double> companion_roots(const std::vector<double>& c) {
  const auto n = static_cast<Eigen::Index>(c.size() - 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    M(0, j) = -c[static_cast<size_t>(n - 1 - j)] / c.back();
  }
  for (Eigen::Index j = 1; j < n; ++j) {
    M(j, j - 1) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  std::vector<double> roots;
  const auto ev = es.eigenvalues();
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (std::abs(ev(j).imag()) <= 1e-10 * std::max(1.0, std::abs(ev(j).real()))) {
      roots.push_back(ev(j).real());
    }
  }
  return roots;
}

std::vector<double> cubic_roots(double a, double b, double c, double d) {
  b /= a;
  c /= a;
  d /= a;
  const double shift = b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  std::vector<double> t;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    t.push_back(std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s));
  } else if (p == 0.0) {
    t.push_back(std::cbrt(-q));
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      t.push_back(r * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
    }
  }
  for (auto& x : t) {
    x -= shift;
  }
  return t;
}

}  // namespace

double Quartic::operator()(double g) const {
  return (((c[4] * g + c[3]) * g + c[2]) * g + c[1]) * g + c[0];
}

double Quartic::derivative(double g) const {
  return ((4.0 * c[4] * g + 3.0 * c[3]) * g + 2.0 * c[2]) * g + c[1];
}

std::vector<double> real_roots(std::vector<double> coeffs) {
  double scale = 0.0;
  for (double v : coeffs) {
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) {
    return {};
  }
  while (coeffs.size() > 1 && std::abs(coeffs.back()) < kDegenerateLeading * scale) {
    coeffs.pop_back();
  }
  std::vector<double> roots;
  switch (coeffs.size()) {
    case 1:
      return {};
    case 2:
      roots.push_back(-coeffs[0] / coeffs[1]);
      break;
    case 3: {
      const double a = coeffs[2], b = coeffs[1], c = coeffs[0];
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        // Cancellation-free pair.
        const double qq = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        roots.push_back(qq / a);
        if (qq != 0.0) {
          roots.push_back(c / qq);
        }
      }
      break;
    }
    case 4:
      roots = cubic_roots(coeffs[3], coeffs[2], coeffs[1], coeffs[0]);
      break;
    default:
      roots = companion_roots(coeffs);
      break;
  }
  const bool finite =
      std::all_of(roots.begin(), roots.end(), [](double x) { return std::isfinite(x); });
  if (!finite && coeffs.size() >= 3) {
    roots = companion_roots(coeffs);
  }
  for (auto& x : roots) {
    polish(coeffs, x);
  }
  return roots;
}

double minimize_on_unit_interval(const Quartic& q) {
  std::vector<double> candidates{0.0, 1.0};
  const auto stationary =
      real_roots({q.c[1], 2.0 * q.c[2], 3.0 * q.c[3], 4.0 * q.c[4]});
  for (double g : stationary) {
    if (std::isfinite(g) && g > 0.0 && g < 1.0) {
      candidates.push_back(g);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  double best = candidates.front();
  double best_value = q(best);
  for (double g : candidates) {
    const double v = q(g);
    if (v < best_value) {
      best = g;
      best_value = v;
    }
  }
  return best;
}

}  // namespace prdl
