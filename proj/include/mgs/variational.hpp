#pragma once

// Discrete minimisation of
//
//   J_i(lambda, v) = int_0^rho r^{N-1} (1 - sqrt(1 - v'^2)) dr - lambda int_0^rho r^{N-1} F_i(v) dr
//
// over piecewise-linear profiles on a uniform mesh with |v'| <= 1 and v(rho) = 0.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/nonlinearity.hpp"

namespace mgs {

struct VariationalProblem {
  int N = 3;
  double lambda = 1.0;
  double rho = 1.0;
  int i = 1;  // hump index, 1-based
  NonlinearityModel trunc_model;
  int M = 1024;

  double h() const { return rho / M; }
  const SignStructure& structure() const { return trunc_model.require_structure(); }

  static VariationalProblem make(int N, double lambda, double rho, int i, const NonlinearityModel& model, int M) {
    if (N < 2) throw domain_error("VariationalProblem: N must be at least 2");
    if (!(lambda > 0.0)) throw domain_error("VariationalProblem: lambda must be positive");
    if (!(rho > 0.0)) throw domain_error("VariationalProblem: rho must be positive");
    if (M < 16) throw domain_error("VariationalProblem: mesh needs at least 16 intervals");
    return VariationalProblem{N, lambda, rho, i, truncate(model, i), M};
  }
};

/// Nodal values v_0..v_M at r_j = j h.
struct DiscreteProfile {
  std::vector<double> v;

  double max() const { return *std::max_element(v.begin(), v.end()); }
  double min() const { return *std::min_element(v.begin(), v.end()); }
};

namespace detail {

inline double cell_weight(const VariationalProblem& vp, int j) {
  const double h = vp.h();
  return std::pow((j + 0.5) * h, vp.N - 1) * h;
}

inline double psi(double s) {
  s = std::clamp(s, -1.0, 1.0);
  return 1.0 - std::sqrt(std::max(0.0, 1.0 - s * s));
}

inline double psi_prime(double s) {
  constexpr double kMargin = 1e-12;  // keeps the derivative finite on the cone boundary
  s = std::clamp(s, -1.0, 1.0);
  return s / std::sqrt(std::max(kMargin, 1.0 - s * s));
}

}  // namespace detail

/// Throws naming the first cell that leaves the discrete cone.
inline void check_cone(const VariationalProblem& vp, const DiscreteProfile& p) {
  if (static_cast<int>(p.v.size()) != vp.M + 1) throw domain_error("profile size does not match mesh");
  if (p.v.back() != 0.0) throw domain_error("profile violates v(rho) = 0");
  const double h = vp.h();
  for (int j = 0; j < vp.M; ++j) {
    if (std::abs(p.v[j + 1] - p.v[j]) > h * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "profile leaves the cone |v'| <= 1 in cell " << j;
      throw domain_error(os.str());
    }
  }
}

inline double eval_J(const VariationalProblem& vp, const DiscreteProfile& p) {
  check_cone(vp, p);
  const double h = vp.h();
  double J = 0.0;
  for (int j = 0; j < vp.M; ++j) {
    const double s = (p.v[j + 1] - p.v[j]) / h;
    const double m = 0.5 * (p.v[j] + p.v[j + 1]);
    J += detail::cell_weight(vp, j) * (detail::psi(s) - vp.lambda * vp.trunc_model.F(m));
  }
  return J;
}

/// Gradient of eval_J with respect to v_0..v_{M-1}; the boundary entry is 0.
inline std::vector<double> grad_J(const VariationalProblem& vp, const DiscreteProfile& p) {
  const double h = vp.h();
  std::vector<double> g(p.v.size(), 0.0);
  for (int j = 0; j < vp.M; ++j) {
    const double s = (p.v[j + 1] - p.v[j]) / h;
    const double m = 0.5 * (p.v[j] + p.v[j + 1]);
    const double w = detail::cell_weight(vp, j);
    const double dpsi = detail::psi_prime(s) / h;
    const double react = 0.5 * vp.lambda * vp.trunc_model.f(m);
    g[j] += w * (-dpsi - react);
    g[j + 1] += w * (dpsi - react);
  }
  g.back() = 0.0;
  return g;
}

/// Backward sweep from v_M = 0 clamping each v_j into [v_{j+1} - h, v_{j+1} + h].
inline void project_cone(std::vector<double>& v, double h) {
  v.back() = 0.0;
  for (std::size_t j = v.size() - 1; j-- > 0;) v[j] = std::clamp(v[j], v[j + 1] - h, v[j + 1] + h);
}

/// Flat top at `height` on [0, rho - 2 height], then (rho - r)/2 down to 0.
inline DiscreteProfile plateau_profile(double height, const VariationalProblem& vp) {
  if (!(vp.rho > 2.0 * height)) throw domain_error("plateau_profile: rho must exceed 2 * height");
  DiscreteProfile p;
  p.v.resize(static_cast<std::size_t>(vp.M) + 1);
  const double h = vp.h();
  for (int j = 0; j <= vp.M; ++j) {
    const double r = j * h;
    p.v[j] = std::min(height, 0.5 * (vp.rho - r));
  }
  p.v.back() = 0.0;
  return p;
}

struct MinimizeResult {
  DiscreteProfile profile;
  double J = 0.0;
  double J_init = 0.0;
  bool converged = false;
  bool stalled = false;  // line search found no decrease before opt_tol was met
  int iterations = 0;
  double stationarity = 0.0;  // ||P(v - tau D^{-1} g) - v||_inf / tau, tau -> 0
  bool nonnegative = true;
};

/// Projected gradient descent with Armijo backtracking. The gradient is
/// scaled by the nodal quadrature weights so every node moves at a rate set
/// by the pointwise equation rather than by r^{N-1}. Each line search starts
/// from twice the previously accepted step, capped at cfg.initial_step.
inline MinimizeResult minimize_J(const VariationalProblem& vp, const DiscreteProfile& init,
                                 const VariationalConfig& cfg = {}) {
  check_cone(vp, init);
  const int M = vp.M;
  const double h = vp.h();

  std::vector<double> node_w(static_cast<std::size_t>(M) + 1, 0.0);
  for (int j = 0; j < M; ++j) {
    const double w = 0.5 * detail::cell_weight(vp, j);
    node_w[j] += w;
    node_w[j + 1] += w;
  }

  MinimizeResult out;
  DiscreteProfile cur = init;
  double J = eval_J(vp, cur);
  out.J_init = J;

  auto step_to = [&](const std::vector<double>& g, double t) {
    DiscreteProfile nxt = cur;
    for (int j = 0; j < M; ++j) nxt.v[j] -= t * g[j] / node_w[j];
    project_cone(nxt.v, h);
    return nxt;
  };

  // Minimisers satisfy v <= beta_i; a node below the cap may approach it but
  // never reach it, which keeps the centre value inside (alpha_i, beta_i).
  const double cap = vp.trunc_model.cap().value_or(kInf);
  auto crosses_cap = [&](const DiscreteProfile& trial) {
    for (int j = 0; j < M; ++j)
      if (cur.v[j] < cap && trial.v[j] >= cap) return true;
    return false;
  };

  double t_prev = cfg.initial_step;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const auto g = grad_J(vp, cur);
    constexpr double kProbe = 1e-8;
    const DiscreteProfile probe = step_to(g, kProbe);
    double stat = 0.0;
    for (int j = 0; j <= M; ++j) stat = std::max(stat, std::abs(probe.v[j] - cur.v[j]) / kProbe);
    out.stationarity = stat;
    if (stat < cfg.opt_tol) {
      out.converged = true;
      break;
    }
    double t = std::min(cfg.initial_step, 2.0 * t_prev);
    bool accepted = false;
    for (int b = 0; b < cfg.max_backtracks; ++b, t *= cfg.armijo_factor) {
      DiscreteProfile trial = step_to(g, t);
      if (crosses_cap(trial)) continue;
      double decrease = 0.0;
      for (int j = 0; j <= M; ++j) decrease += g[j] * (trial.v[j] - cur.v[j]);
      const double Jt = eval_J(vp, trial);
      if (Jt < J && Jt <= J + cfg.armijo_sigma * decrease) {
        accepted = true;
        t_prev = t;
        cur = std::move(trial);
        J = Jt;
        break;
      }
    }
    if (!accepted) {
      // No representable decrease along the projected direction.
      out.stalled = true;
      break;
    }
  }
  out.iterations = it;
  out.J = J;
  out.nonnegative = cur.min() >= 0.0;
  out.profile = std::move(cur);
  return out;
}

/// max_j v_j > beta_{i-1}: the hump-i minimiser climbed past the previous hump.
inline bool check_escape(const VariationalProblem& vp, const DiscreteProfile& p) {
  const double prev_beta = vp.structure().beta(vp.i - 1);
  return p.max() > prev_beta;
}

struct CenterHeight {
  double value = 0.0;
  bool accepted = false;  // value in (alpha_i, beta_i)
};

inline CenterHeight center_height(const VariationalProblem& vp, const DiscreteProfile& p) {
  const auto& st = vp.structure();
  const double v0 = p.v.front();
  return {v0, v0 > st.alpha(vp.i) && v0 < st.beta(vp.i)};
}

}  // namespace mgs
