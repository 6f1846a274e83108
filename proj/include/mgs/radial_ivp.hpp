#pragma once

// Radial initial value problem
//
//   (r^{N-1} phi'(u'))' = -lambda r^{N-1} f(u),   u(0) = zeta, u'(0) = 0,
//
// integrated in the flux coordinate q = phi'(u') = u'/sqrt(1-u'^2). In these
// coordinates the slope bound |u'| < 1 holds automatically and the system is
//
//   u' = q / sqrt(1+q^2)
//   q' = -(N-1) q / r - lambda f(u)
//   E' = q^2 / (r sqrt(1+q^2))
//
// where E carries the dissipation integral of the energy identity.

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/nonlinearity.hpp"

namespace mgs {

struct ShootingProblem {
  int N = 3;
  double lambda = 1.0;
  NonlinearityModel model;

  /// Validating constructor: N >= 2, lambda > 0, sign structure attached.
  static ShootingProblem make(int N, double lambda, NonlinearityModel model) {
    if (N < 2) throw domain_error("ShootingProblem: N must be at least 2");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw domain_error("ShootingProblem: lambda must be positive");
    model.require_structure();
    return ShootingProblem{N, lambda, std::move(model)};
  }
};

/// phi'(p) = p / sqrt(1 - p^2) on (-1, 1).
inline double phi_prime(double p) {
  if (!(std::abs(p) < 1.0)) throw domain_error("phi_prime: |p| must be < 1");
  return p / std::sqrt(1.0 - p * p);
}

/// (phi')^{-1}(q) = q / sqrt(1 + q^2), always in (-1, 1).
inline double phi_prime_inv(double q) {
  if (!std::isfinite(q)) throw domain_error("phi_prime_inv: q must be finite");
  return q / std::sqrt(1.0 + q * q);
}

struct TrajectoryState {
  double r = 0.0;
  double u = 0.0;
  double q = 0.0;
  double E = 0.0;

  double uprime() const { return q / std::sqrt(1.0 + q * q); }
  /// H(u') written in the flux coordinate.
  double H() const { return std::sqrt(1.0 + q * q) - 1.0; }
};

enum class TerminalKind { SlopeVanished, HeightVanished, ReachedRmax, Equilibrium, StepFailure, Ascending };

inline const char* to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::SlopeVanished: return "SlopeVanished";
    case TerminalKind::HeightVanished: return "HeightVanished";
    case TerminalKind::ReachedRmax: return "ReachedRmax";
    case TerminalKind::Equilibrium: return "Equilibrium";
    case TerminalKind::StepFailure: return "StepFailure";
    case TerminalKind::Ascending: return "Ascending";
  }
  return "?";
}

struct TerminalEvent {
  TerminalKind kind = TerminalKind::StepFailure;
  double radius = 0.0;  // R' for the vanishing events, r at stop otherwise
  bool ambiguous = false;
  std::string detail;
};

struct Trajectory {
  double zeta = 0.0;
  std::vector<TrajectoryState> samples;  // strictly increasing r
  TerminalEvent terminal;
  long steps = 0;

  const TrajectoryState& back() const { return samples.back(); }

  /// min sqrt(1 - u'^2) along the samples: the realised gradient margin.
  double min_slope_margin() const {
    double m = 1.0;
    for (const auto& s : samples) m = std::min(m, 1.0 / std::sqrt(1.0 + s.q * s.q));
    return m;
  }
};

struct IntegrateOptions {
  std::optional<double> r0;
  bool record = true;  // false keeps only the first and last state
};

inline double default_r0(double zeta) { return 1e-6 * std::max(1.0, zeta); }

/// Series start at r0 > 0, side-stepping the 1/r singularity. Returns nullopt
/// when f(zeta) = 0 (the constant solution).
inline std::optional<TrajectoryState> taylor_start(const ShootingProblem& p, double zeta, double r0) {
  if (!(zeta > 0.0)) throw domain_error("taylor_start: zeta must be positive");
  if (!(r0 > 0.0)) throw domain_error("taylor_start: r0 must be positive");
  const double fz = p.model.f(zeta);
  if (fz == 0.0) return std::nullopt;
  const double a = p.lambda * fz / p.N;  // q ~ -a r, u ~ zeta - a r^2 / 2
  TrajectoryState s;
  s.r = r0;
  s.q = -a * r0;
  s.u = zeta - 0.5 * a * r0 * r0;
  s.E = 0.5 * a * a * r0 * r0;  // int_0^r0 (a s)^2 / s ds at leading order
  return s;
}

namespace detail {

using OdeState = std::array<double, 3>;  // u, q, E

struct RadialRhs {
  const ShootingProblem* p;
  void operator()(const OdeState& x, OdeState& dx, double r) const {
    const double q = x[1];
    const double root = std::sqrt(1.0 + q * q);
    dx[0] = q / root;
    dx[1] = -(p->N - 1) * q / r - p->lambda * p->model.f(x[0]);
    dx[2] = q * q / (r * root);
  }
};

}  // namespace detail

/// Continue a trajectory from an arbitrary state up to r_end, with the same
/// event rules as integrate(). zeta is carried along for bookkeeping only.
inline Trajectory integrate_from(const ShootingProblem& p, const TrajectoryState& start, double zeta, double r_end,
                                 const OdeTolerances& tol = {}, bool record = true) {
  namespace ode = boost::numeric::odeint;
  using detail::OdeState;

  Trajectory tr;
  tr.zeta = zeta;
  tr.samples.push_back(start);
  if (!(r_end > start.r)) {
    tr.terminal = {TerminalKind::ReachedRmax, start.r, false, ""};
    return tr;
  }

  const detail::RadialRhs rhs{&p};
  ode::runge_kutta_cash_karp54<OdeState> plain;
  auto controlled = ode::make_controlled(tol.abs, tol.rel, ode::runge_kutta_cash_karp54<OdeState>());

  OdeState x{start.u, start.q, start.E};
  double r = start.r;
  double dt = std::min(std::max(start.r, 1e-8), r_end - r);

  auto to_state = [](double rr, const OdeState& y) { return TrajectoryState{rr, y[0], y[1], y[2]}; };
  auto finish = [&](TerminalKind kind, double radius, const OdeState& y, std::string detail = {}, bool amb = false) {
    if (!record && tr.samples.size() > 1) tr.samples.resize(1);
    if (radius > tr.samples.back().r) tr.samples.push_back(to_state(radius, y));
    tr.terminal = {kind, radius, amb, std::move(detail)};
    return tr;
  };

  // Smallest h in (0, H] at which pred(state after one step of size h) holds.
  auto locate = [&](const OdeState& x0, double r0, double H, auto pred, OdeState& out) {
    double lo = 0.0, hi = H;
    OdeState y_hi{};
    {
      OdeState y = x0;
      plain.do_step(rhs, y, r0, H);
      y_hi = y;
    }
    while (hi - lo > tol.event * std::max(1.0, r0)) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      OdeState y = x0;
      plain.do_step(rhs, y, r0, mid);
      if (pred(y)) {
        hi = mid;
        y_hi = y;
      } else {
        lo = mid;
      }
    }
    out = y_hi;
    return r0 + hi;
  };

  while (r < r_end) {
    if (tr.steps >= tol.max_steps) return finish(TerminalKind::StepFailure, r, x, "step budget exhausted");
    dt = std::min(dt, r_end - r);
    const OdeState x_old = x;
    const double r_old = r;
    const auto res = controlled.try_step(rhs, x, r, dt);
    if (res == ode::fail) {
      if (dt < tol.min_step * std::max(1.0, r)) {
        std::ostringstream os;
        os << "step size underflow at r=" << r;
        return finish(TerminalKind::StepFailure, r, x, os.str());
      }
      continue;
    }
    ++tr.steps;
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2])) {
      x = x_old;
      return finish(TerminalKind::StepFailure, r_old, x_old, "non-finite state");
    }
    if (r > r_end) r = r_end;

    const bool slope_ev = x_old[1] < 0.0 && x[1] >= 0.0;
    const bool height_ev = x_old[0] > 0.0 && x[0] <= 0.0;
    if (slope_ev || height_ev) {
      const double H = r - r_old;
      OdeState ys{}, yh{};
      double rs = kInf, rh = kInf;
      if (slope_ev) rs = locate(x_old, r_old, H, [](const OdeState& y) { return y[1] >= 0.0; }, ys);
      if (height_ev) rh = locate(x_old, r_old, H, [](const OdeState& y) { return y[0] <= 0.0; }, yh);
      const double close = 10.0 * tol.event * std::max(1.0, r_old);
      if (slope_ev && height_ev && std::abs(rs - rh) <= close) {
        std::ostringstream os;
        os << "Ambiguous: u and u' vanish together near r=" << rs;
        return finish(TerminalKind::StepFailure, std::min(rs, rh), rs <= rh ? ys : yh, os.str(), true);
      }
      if (rs < rh) {
        if (ys[0] <= tol.event_floor) {
          std::ostringstream os;
          os << "Ambiguous: slope vanished at height " << ys[0] << " below event floor";
          return finish(TerminalKind::StepFailure, rs, ys, os.str(), true);
        }
        return finish(TerminalKind::SlopeVanished, rs, ys);
      }
      return finish(TerminalKind::HeightVanished, rh, yh);
    }
    if (record) tr.samples.push_back(to_state(r, x));
  }
  return finish(TerminalKind::ReachedRmax, r, x);
}

/// Integrate from u(0) = zeta to the first of: q crossing 0 from below,
/// u crossing 0, or r = r_max.
inline Trajectory integrate(const ShootingProblem& p, double zeta, double r_max, const OdeTolerances& tol = {},
                            const IntegrateOptions& opt = {}) {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw domain_error("integrate: zeta must be positive");
  if (!(r_max > 0.0)) throw domain_error("integrate: r_max must be positive");
  double r0 = opt.r0.value_or(default_r0(zeta));
  if (!opt.r0) {
    // Keep the start inside the series regime, |q(r0)| <= 1e-3.
    const double a = p.lambda * std::abs(p.model.f(zeta)) / p.N;
    if (a * r0 > 1e-3) r0 = 1e-3 / a;
  }
  const auto start = taylor_start(p, zeta, r0);
  if (!start) {
    Trajectory tr;
    tr.zeta = zeta;
    tr.samples.push_back(TrajectoryState{r0, zeta, 0.0, 0.0});
    tr.terminal = {TerminalKind::Equilibrium, r0, false, "f(zeta) = 0"};
    return tr;
  }
  if (start->q > 0.0) {
    Trajectory tr;
    tr.zeta = zeta;
    tr.samples.push_back(*start);
    tr.terminal = {TerminalKind::Ascending, r0, false, "f(zeta) < 0: profile starts increasing"};
    return tr;
  }
  return integrate_from(p, *start, zeta, std::max(r_max, r0), tol, opt.record);
}

/// max over samples of |H(u') + (N-1) E - lambda (F(zeta) - F(u))|.
inline double energy_residual(const ShootingProblem& p, const Trajectory& tr, double zeta) {
  const double Fz = p.model.F(zeta);
  double worst = 0.0;
  for (const auto& s : tr.samples) {
    const double lhs = s.H() + (p.N - 1) * s.E;
    const double rhs = p.lambda * (Fz - p.model.F(s.u));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace mgs
