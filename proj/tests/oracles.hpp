#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// own root finders, quadrature or integrators.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

// f(s) = (s^2 - 19 s + 18)(12 s^2 - s^3 - 27 s), written out by hand.
inline double two_hump_f(double s) {
  if (s <= 0.0) return 0.0;
  return (s * s - 19.0 * s + 18.0) * (12.0 * s * s - s * s * s - 27.0 * s);
}

// f = -s^5 + 31 s^4 - 273 s^3 + 729 s^2 - 486 s, integrated term by term.
inline double two_hump_F(double u) {
  if (u <= 0.0) return 0.0;
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u, u6 = u5 * u;
  return -u6 / 6.0 + 31.0 * u5 / 5.0 - 273.0 * u4 / 4.0 + 243.0 * u3 - 243.0 * u2;
}

inline double cubic_f(double s) { return s <= 0.0 ? 0.0 : s * s * s - s; }
inline double cubic_F(double u) { return u <= 0.0 ? 0.0 : 0.25 * u * u * u * u - 0.5 * u * u; }

// Plain bisection to the last representable midpoint. Requires a sign change.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Every sign change of g on a uniform grid of n cells over (0, top].
inline std::vector<double> sign_changes(const std::function<double(double)>& g, double top, int n) {
  std::vector<double> roots;
  double prev_s = top / n;
  double prev = g(prev_s);
  for (int j = 2; j <= n; ++j) {
    const double s = top * j / n;
    const double v = g(s);
    if (v != 0.0 && prev != 0.0 && (v > 0.0) != (prev > 0.0)) roots.push_back(bisect(g, prev_s, s));
    if (v != 0.0) {
      prev = v;
      prev_s = s;
    }
  }
  return roots;
}

// Exact integral of the piecewise linear interpolant from 0 to u (u inside the knots).
inline double piecewise_F(const std::vector<std::pair<double, double>>& knots, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const auto [s0, f0] = knots[i];
    const auto [s1, f1] = knots[i + 1];
    const double a = std::max(s0, 0.0), b = std::min(s1, u);
    if (b <= a) continue;
    auto fl = [&](double s) { return f0 + (f1 - f0) * (s - s0) / (s1 - s0); };
    acc += 0.5 * (fl(a) + fl(b)) * (b - a);
  }
  return acc;
}

struct Rk4State {
  double r, u, q;
};

// Fixed-step classical RK4 on (u, q) from a given state, stopping exactly at
// each requested radius. Returns u at those radii.
inline std::vector<double> rk4_profile(int N, double lambda, const std::function<double(double)>& f, Rk4State s,
                                       const std::vector<double>& radii, double h) {
  auto rhs = [&](double r, double u, double q, double& du, double& dq) {
    du = q / std::sqrt(1.0 + q * q);
    dq = -(N - 1) * q / r - lambda * f(u);
  };
  std::vector<double> out;
  out.reserve(radii.size());
  for (double target : radii) {
    while (s.r < target) {
      const double hh = std::min(h, target - s.r);
      double k1u, k1q, k2u, k2q, k3u, k3q, k4u, k4q;
      rhs(s.r, s.u, s.q, k1u, k1q);
      rhs(s.r + 0.5 * hh, s.u + 0.5 * hh * k1u, s.q + 0.5 * hh * k1q, k2u, k2q);
      rhs(s.r + 0.5 * hh, s.u + 0.5 * hh * k2u, s.q + 0.5 * hh * k2q, k3u, k3q);
      rhs(s.r + hh, s.u + hh * k3u, s.q + hh * k3q, k4u, k4q);
      s.u += hh / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      s.q += hh / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
      s.r = (target - s.r - hh) < 1e-15 * target ? target : s.r + hh;
    }
    out.push_back(s.u);
  }
  return out;
}

// Central difference of a scalar function of a vector, one coordinate at a time.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& J,
                                       std::vector<double> v, double step) {
  std::vector<double> g(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + step;
    const double jp = J(v);
    v[i] = keep - step;
    const double jm = J(v);
    v[i] = keep;
    g[i] = (jp - jm) / (2.0 * step);
  }
  return g;
}

}  // namespace oracle
