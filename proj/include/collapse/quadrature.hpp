#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace collapse {

inline constexpr double kQuadratureRelTol = 1e-10;

// Adaptive 7/15-point Gauss-Kronrod on [a, b]. Nested integrals are formed by
// calling this from inside the integrand.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kQuadratureRelTol) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, /*max_depth=*/20, rel_tol, &error, &l1);
}

}  // namespace collapse
