#pragma once

#include <optional>

namespace mgs {

/// ODE integration tolerances. `event` is the relative radius tolerance used
/// when bisecting for R'.
struct OdeTolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  double event = 1e-13;
  double event_floor = 1e-10;   // SlopeVanished requires u above this
  double min_step = 1e-14;      // relative to max(1, r)
  long max_steps = 20'000'000;
};

/// Root finding and quadrature settings for the nonlinearity.
struct NonlinearityConfig {
  int scan_points = 4096;
  double root_tol = 1e-12;        // relative
  double quad_rtol = 1e-12;
  double a5_floor = 1e-8;
  double a5_collapse_ratio = 0.5; // smallest-offset quotient must keep this share of the largest-offset one
  double gamma_fraction = 0.5;    // gamma_i = xi_i + fraction * (beta_i - xi_i)
};

struct ShootingConfig {
  double zeta_tol = 1e-12;        // relative bracket width at convergence
  std::optional<double> decay_tol;// default 1e-4 * beta_1
  double tail_fraction = 0.5;     // ground-state profile is cut where u first drops below tail_fraction * decay_tol
  std::optional<double> r_max;    // default 1e4 * beta_n * max(1, lambda^-1/2)
  std::optional<double> r0;       // default 1e-6 * max(1, zeta)
  std::optional<double> rho;      // variational seed ball; default 8 * beta_n
  int scan_points = 4096;         // Minus fallback grid
  int geometric_points = 60;      // refinement toward beta_k after the uniform grid
  int max_bisections = 400;
  int threshold_probe_points = 5;
};

struct VariationalConfig {
  int mesh = 1024;
  double opt_tol = 1e-9;
  int max_iters = 4000;
  double armijo_factor = 0.5;
  double armijo_sigma = 1e-4;
  double initial_step = 1.0;
  int max_backtracks = 80;
};

}  // namespace mgs
