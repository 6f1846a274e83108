#pragma once

#include <cmath>
#include <sstream>

#include "mgs/errors.hpp"

namespace mgs::quad {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                    double tol, int depth, double a0, double b0) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) <= 1e-15 * (1.0 + std::abs(a))) return left + right + delta / 15.0;
  if (depth <= 0) {
    std::ostringstream os;
    os << "adaptive Simpson did not converge on [" << a0 << ", " << b0 << "] near [" << a << ", " << b << "]";
    throw numerical_error(os.str());
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, a0, b0) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, a0, b0);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The absolute target is
/// rtol * (|crude estimate| + scale) where scale is a magnitude hint for the
/// integrand (pass 0 to rely on the crude estimate alone).
template <class F>
double adaptive_simpson(const F& f, double a, double b, double rtol, double scale = 0.0, int max_depth = 50) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, rtol, scale, max_depth);
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double mag = std::abs(whole) + std::abs(b - a) * (std::abs(fa) + std::abs(fm) + std::abs(fb)) / 3.0 + scale;
  const double tol = rtol * (mag > 0 ? mag : 1.0);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth, a, b);
}

}  // namespace mgs::quad
