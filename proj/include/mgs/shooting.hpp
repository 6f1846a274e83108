#pragma once

// Shooting on the initial height zeta. For hump k the heights in
// (alpha_k, beta_k) split into
//   Plus  : u' returns to 0 while u > 0   (the profile turns back up)
//   Minus : u reaches 0 while u' < 0      (the profile crosses the axis)
// and ground states sit on the boundary between the two.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/nonlinearity.hpp"
#include "mgs/parallel.hpp"
#include "mgs/radial_ivp.hpp"
#include "mgs/variational.hpp"

namespace mgs {

struct SolverOptions {
  OdeTolerances ode;
  ShootingConfig shooting;
  VariationalConfig variational;

  double r_max(const ShootingProblem& p) const {
    if (shooting.r_max) return *shooting.r_max;
    return 1e4 * p.model.require_structure().top() * std::max(1.0, 1.0 / std::sqrt(p.lambda));
  }
  double decay_tol(const ShootingProblem& p) const {
    if (shooting.decay_tol) return *shooting.decay_tol;
    const auto& st = p.model.require_structure();
    const double b1 = std::isfinite(st.beta(1)) ? st.beta(1) : st.gamma(1);
    return 1e-4 * b1;
  }
  double rho(const ShootingProblem& p) const {
    if (shooting.rho) return *shooting.rho;
    return 8.0 * p.model.require_structure().top();
  }
  IntegrateOptions integrate_options(bool record) const { return {shooting.r0, record}; }
};

enum class Verdict { Plus, Minus, Undetermined, Equilibrium, Failure };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Plus: return "Plus";
    case Verdict::Minus: return "Minus";
    case Verdict::Undetermined: return "Undetermined";
    case Verdict::Equilibrium: return "Equilibrium";
    case Verdict::Failure: return "Failure";
  }
  return "?";
}

struct Classification {
  Verdict verdict = Verdict::Failure;
  double zeta = 0.0;
  double radius = 0.0;  // R' for Plus/Minus, stopping radius otherwise
  double u_end = 0.0;
  double slope_end = 0.0;
  bool ambiguous = false;
  std::string detail;
};

inline Classification classify(const ShootingProblem& p, double zeta, double r_max, const SolverOptions& opt = {}) {
  const Trajectory tr = integrate(p, zeta, r_max, opt.ode, opt.integrate_options(false));
  Classification c;
  c.zeta = zeta;
  c.radius = tr.terminal.radius;
  c.u_end = tr.back().u;
  c.slope_end = tr.back().uprime();
  c.ambiguous = tr.terminal.ambiguous;
  c.detail = tr.terminal.detail;
  switch (tr.terminal.kind) {
    case TerminalKind::SlopeVanished: c.verdict = Verdict::Plus; break;
    case TerminalKind::HeightVanished: c.verdict = Verdict::Minus; break;
    case TerminalKind::ReachedRmax: c.verdict = Verdict::Undetermined; break;
    case TerminalKind::Equilibrium: c.verdict = Verdict::Equilibrium; break;
    case TerminalKind::Ascending: c.verdict = Verdict::Undetermined; break;
    case TerminalKind::StepFailure: c.verdict = Verdict::Failure; break;
  }
  return c;
}

struct SeedResult {
  double zeta = 0.0;
  std::string source;  // "variational", "uniform-grid" or "geometric-grid"
  double center_height = 0.0;
  bool center_accepted = false;
  Verdict center_verdict = Verdict::Failure;
  double variational_J = 0.0;
  bool variational_escape = false;
};

namespace detail {

inline std::optional<double> first_minus(const ShootingProblem& p, const std::vector<double>& zetas, double r_max,
                                         const SolverOptions& opt) {
  const auto verdicts = parallel_map(zetas.size(), [&](std::size_t i) { return classify(p, zetas[i], r_max, opt).verdict; });
  for (std::size_t i = 0; i < zetas.size(); ++i)
    if (verdicts[i] == Verdict::Minus) return zetas[i];
  return std::nullopt;
}

}  // namespace detail

/// A Minus height in hump k. First the centre of the hump-k variational
/// minimiser on B_rho; if that does not classify Minus, a uniform grid over
/// (xi_k, beta_k) and then a grid refining geometrically toward beta_k.
inline SeedResult seed_minus(const ShootingProblem& p, int k, double rho, const SolverOptions& opt = {}) {
  const auto& st = p.model.require_structure();
  if (k < 1 || k > st.n()) throw domain_error("seed_minus: hump index out of range");
  const double r_max = opt.r_max(p);
  SeedResult out;

  const double xi = st.xi(k);
  const double gamma = st.gamma(k);
  if (rho > 2.0 * gamma) {
    const auto vp = VariationalProblem::make(p.N, p.lambda, rho, k, p.model, opt.variational.mesh);
    const auto res = minimize_J(vp, plateau_profile(gamma, vp), opt.variational);
    const auto ch = center_height(vp, res.profile);
    out.center_height = ch.value;
    out.center_accepted = ch.accepted;
    out.variational_J = res.J;
    out.variational_escape = check_escape(vp, res.profile);
    if (ch.accepted) {
      out.center_verdict = classify(p, ch.value, r_max, opt).verdict;
      if (out.center_verdict == Verdict::Minus) {
        out.zeta = ch.value;
        out.source = "variational";
        return out;
      }
    }
  }

  double hi = st.beta(k);
  const int m = std::max(2, opt.shooting.scan_points);
  auto uniform = [&](double a, double b) {
    std::vector<double> z;
    z.reserve(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) z.push_back(a + (b - a) * j / (m + 1));
    return z;
  };

  if (std::isfinite(hi)) {
    if (auto z = detail::first_minus(p, uniform(xi, hi), r_max, opt)) {
      out.zeta = *z;
      out.source = "uniform-grid";
      return out;
    }
    std::vector<double> geo;
    for (int j = 1; j <= opt.shooting.geometric_points; ++j) {
      const double z = hi - (hi - xi) * std::ldexp(1.0, -j);
      if (!(z < hi)) break;
      geo.push_back(z);
    }
    if (auto z = detail::first_minus(p, geo, r_max, opt)) {
      out.zeta = *z;
      out.source = "geometric-grid";
      return out;
    }
  } else {
    // (A2)' tail hump: widen the window until something crosses the axis.
    hi = std::max(2.0 * xi, st.search_max);
    for (int widen = 0; widen < 8; ++widen, hi *= 2.0) {
      if (auto z = detail::first_minus(p, uniform(xi, hi), r_max, opt)) {
        out.zeta = *z;
        out.source = "uniform-grid";
        return out;
      }
    }
  }
  throw MultiplicityNotReached(p.lambda, {}, {{k, "no Minus height found in hump " + std::to_string(k)}});
}

struct GroundState {
  int k = 0;
  double zeta_star = 0.0;
  double lambda = 0.0;
  Trajectory profile;
  double bracket_width = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
  double energy_residual = 0.0;
  double terminal_height = 0.0;  // u(r_max)
  double r_max = 0.0;            // radius the profile is resolved to
  double decay_tol = 0.0;
  double min_slope_margin = 1.0; // min sqrt(1 - u'^2)
  double tail_rate = 0.0;        // |u'| / u at r_max
  double tail_rate_bound = 0.0;
  int bisections = 0;
  std::string seed_source;
  Verdict midpoint_fate = Verdict::Undetermined;  // what the bisection midpoint does past r_max
  double midpoint_fate_radius = 0.0;
};

namespace detail {

// u' < 0 at every sample after the start. Stored heights may tie where the
// drop is below one ulp of u (flat centres), so u itself only has to be non-increasing.
inline bool strictly_decreasing(const Trajectory& tr) {
  for (std::size_t i = 1; i < tr.samples.size(); ++i)
    if (!(tr.samples[i].q < 0.0) || tr.samples[i].u > tr.samples[i - 1].u) return false;
  return true;
}

}  // namespace detail

/// Bisects between a Plus height (xi_k, by the closed end of the guaranteed
/// Plus interval) and a Minus height from seed_minus, then resolves the
/// boundary trajectory until it has decayed below tail_fraction * decay_tol.
inline GroundState find_ground_state(const ShootingProblem& p, int k, const SolverOptions& opt = {}) {
  const auto& st = p.model.require_structure();
  if (k < 1 || k > st.n()) throw domain_error("find_ground_state: hump index out of range");
  const double r_max = opt.r_max(p);
  const double alpha = st.alpha(k);
  const double beta = st.beta(k);
  constexpr double kGolden = 0.6180339887498949;

  double zp = st.xi(k);
  Classification cp = classify(p, zp, r_max, opt);
  // xi_k is Plus in exact arithmetic; if tolerance noise spoils it, walk toward alpha_k.
  for (int it = 0; it < 40 && cp.verdict != Verdict::Plus; ++it) {
    zp = alpha + (zp - alpha) * kGolden;
    cp = classify(p, zp, r_max, opt);
  }
  if (cp.verdict != Verdict::Plus) throw numerical_error("find_ground_state: no Plus height found in hump " + std::to_string(k));

  const SeedResult seed = seed_minus(p, k, opt.rho(p), opt);
  double zm = seed.zeta;
  if (classify(p, zm, r_max, opt).verdict != Verdict::Minus) {
    bool found = false;
    const double top = std::isfinite(beta) ? beta : 2.0 * zm;
    for (int it = 0; it < 40 && !found; ++it) {
      zm = top - (top - zm) * kGolden;
      found = classify(p, zm, r_max, opt).verdict == Verdict::Minus;
    }
    if (!found) throw numerical_error("find_ground_state: bracket invalid, both ends classify alike in hump " + std::to_string(k));
  }

  GroundState gs;
  gs.k = k;
  gs.lambda = p.lambda;
  gs.seed_source = seed.source;
  gs.decay_tol = opt.decay_tol(p);

  std::optional<double> exact;  // a midpoint that never decided before r_max
  int bis = 0;
  int failures = 0;
  for (; bis < opt.shooting.max_bisections; ++bis) {
    if (std::abs(zm - zp) <= opt.shooting.zeta_tol * std::max(std::abs(zp), std::abs(zm))) break;
    double mid = 0.5 * (zp + zm);
    if (mid == zp || mid == zm) break;
    Classification c = classify(p, mid, r_max, opt);
    if (c.verdict == Verdict::Failure || c.verdict == Verdict::Equilibrium) {
      if (++failures > 3) throw numerical_error("find_ground_state: repeated step failure near zeta=" + std::to_string(mid) + ": " + c.detail);
      mid = zp + (zm - zp) * (1.0 - kGolden);
      c = classify(p, mid, r_max, opt);
    }
    if (c.verdict == Verdict::Plus) zp = mid;
    else if (c.verdict == Verdict::Minus) zm = mid;
    else if (c.verdict == Verdict::Undetermined) {
      exact = mid;
      break;
    }
  }
  gs.bisections = bis;
  gs.zeta_plus = zp;
  gs.zeta_minus = zm;
  gs.bracket_width = std::abs(zm - zp);
  gs.zeta_star = exact.value_or(0.5 * (zp + zm));

  // Resolve the boundary trajectory and cut it where it has decayed.
  const Trajectory full = integrate(p, gs.zeta_star, r_max, opt.ode, opt.integrate_options(true));
  const Classification fate = classify(p, gs.zeta_star, r_max, opt);
  gs.midpoint_fate = fate.verdict;
  gs.midpoint_fate_radius = fate.radius;
  const double floor_u = opt.shooting.tail_fraction * gs.decay_tol;
  std::optional<double> r_cut;
  double u_min = full.samples.front().u;
  for (const auto& s : full.samples) {
    u_min = std::min(u_min, s.u);
    if (s.u > 0.0 && s.u < floor_u && s.q < 0.0) {
      r_cut = s.r;
      break;
    }
  }
  if (!r_cut) {
    std::ostringstream os;
    os << "hump " << k << ": boundary trajectory not resolved below decay_tol (min u = " << u_min
       << ", bracket width " << gs.bracket_width << ", midpoint " << to_string(fate.verdict) << " at r = " << fate.radius
       << " with u = " << fate.u_end << ")";
    throw numerical_error(os.str());
  }
  gs.profile = integrate(p, gs.zeta_star, *r_cut, opt.ode, opt.integrate_options(true));
  gs.r_max = gs.profile.back().r;
  gs.terminal_height = gs.profile.back().u;
  gs.energy_residual = energy_residual(p, gs.profile, gs.zeta_star);
  gs.min_slope_margin = gs.profile.min_slope_margin();

  if (gs.profile.terminal.kind != TerminalKind::ReachedRmax)
    throw numerical_error("hump " + std::to_string(k) + ": profile terminated early (" + to_string(gs.profile.terminal.kind) + ")");
  if (!detail::strictly_decreasing(gs.profile))
    throw numerical_error("hump " + std::to_string(k) + ": ground-state profile is not strictly decreasing");
  if (!(gs.terminal_height < gs.decay_tol) || !(gs.terminal_height > 0.0))
    throw numerical_error("hump " + std::to_string(k) + ": terminal height outside (0, decay_tol)");

  // Near u = 0 a decaying tail has |u'|/u close to sqrt(lambda |f'(0)|) + (N-1)/(2r).
  // A Minus trajectory cut just above the axis still has |u'| of order one.
  const double d0 = 1e-8 * st.alpha(1);
  const double kappa = std::sqrt(p.lambda * std::max(0.0, -p.model.f(d0) / d0));
  gs.tail_rate = std::abs(gs.profile.back().uprime()) / gs.terminal_height;
  gs.tail_rate_bound = 2.0 * (kappa + (p.N - 1) / gs.r_max);
  if (!(gs.tail_rate <= gs.tail_rate_bound)) {
    std::ostringstream os;
    os << "hump " << k << ": profile reaches u = " << gs.terminal_height << " with u' = " << gs.profile.back().uprime()
       << ", not a decaying tail (|u'|/u = " << gs.tail_rate << " > " << gs.tail_rate_bound << ")";
    throw numerical_error(os.str());
  }
  return gs;
}

/// Classification atlas over (alpha_k + eps, beta_k - eps), eps = 1e-6 (beta_k - alpha_k).
inline std::vector<Classification> sweep_zeta(const ShootingProblem& p, int k, int grid, const SolverOptions& opt = {}) {
  const auto& st = p.model.require_structure();
  if (k < 1 || k > st.n()) throw domain_error("sweep_zeta: hump index out of range");
  if (grid < 2) throw domain_error("sweep_zeta: grid must be at least 2");
  const double a0 = st.alpha(k);
  const double b0 = std::isfinite(st.beta(k)) ? st.beta(k) : std::max(st.search_max, 2.0 * st.xi(k));
  const double eps = 1e-6 * (b0 - a0);
  const double a = a0 + eps, b = b0 - eps;
  const double r_max = opt.r_max(p);
  return parallel_map(static_cast<std::size_t>(grid), [&](std::size_t j) {
    const double z = a + (b - a) * static_cast<double>(j) / (grid - 1);
    return classify(p, z, r_max, opt);
  });
}

struct MultiplicityResult {
  std::vector<GroundState> ground_states;             // sorted by zeta_star
  std::vector<std::pair<int, std::string>> failures;  // hump, reason

  bool complete() const { return failures.empty(); }
};

/// One ground state per hump; failures are collected rather than thrown.
inline MultiplicityResult solve_all(const ShootingProblem& p, const SolverOptions& opt = {}) {
  const auto& st = p.model.require_structure();
  MultiplicityResult out;
  for (int k = 1; k <= st.n(); ++k) {
    try {
      out.ground_states.push_back(find_ground_state(p, k, opt));
    } catch (const Error& e) {
      out.failures.emplace_back(k, e.what());
    }
  }
  std::sort(out.ground_states.begin(), out.ground_states.end(),
            [](const auto& a, const auto& b) { return a.zeta_star < b.zeta_star; });
  for (std::size_t i = 1; i < out.ground_states.size(); ++i)
    if (!(out.ground_states[i].zeta_star > out.ground_states[i - 1].zeta_star))
      out.failures.emplace_back(out.ground_states[i].k, "ground state coincides with hump " +
                                                            std::to_string(out.ground_states[i - 1].k));
  return out;
}

/// Every hump's ground state or MultiplicityNotReached naming what succeeded.
inline std::vector<GroundState> solve_multiplicity(const ShootingProblem& p, const SolverOptions& opt = {}) {
  auto res = solve_all(p, opt);
  if (!res.complete()) {
    std::vector<int> ok;
    for (const auto& g : res.ground_states) ok.push_back(g.k);
    throw MultiplicityNotReached(p.lambda, std::move(ok), std::move(res.failures));
  }
  return std::move(res.ground_states);
}

struct ThresholdSample {
  double lambda = 0.0;
  bool success = false;
  std::string detail;
};

struct ThresholdResult {
  int k = 0;
  double lambda = 0.0;           // geometric midpoint of the final bracket
  double lambda_success = 0.0;   // bracket end where hump k resolved
  double lambda_failure = 0.0;
  bool success_above = true;     // success side is the larger lambda
  int steps = 0;
  std::vector<ThresholdSample> samples;  // every evaluation, in order
};

/// Bisection (in log lambda) on "seed_minus succeeds and find_ground_state
/// converges for hump k". The two ends of [lo, hi] must disagree; the
/// direction of the transition is reported, not assumed.
inline ThresholdResult find_lambda_threshold(const ShootingProblem& tmpl, int k, double lambda_lo, double lambda_hi,
                                             int steps, const SolverOptions& opt = {}) {
  if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo)) throw domain_error("find_lambda_threshold: need 0 < lambda_lo < lambda_hi");
  if (steps < 0) throw domain_error("find_lambda_threshold: steps must be non-negative");
  ThresholdResult out;
  out.k = k;
  out.steps = steps;
  auto probe = [&](double lam) {
    ThresholdSample s{lam, false, ""};
    try {
      const auto p = ShootingProblem::make(tmpl.N, lam, tmpl.model);
      const auto gs = find_ground_state(p, k, opt);
      s.success = true;
      std::ostringstream os;
      os.precision(17);
      os << "zeta*=" << gs.zeta_star;
      s.detail = os.str();
    } catch (const Error& e) {
      s.detail = e.what();
    }
    out.samples.push_back(s);
    return s.success;
  };

  // Coarse log-spaced probe across the bracket to catch non-monotone behaviour.
  const int np = std::max(2, opt.shooting.threshold_probe_points);
  std::vector<std::pair<double, bool>> coarse;
  for (int j = 0; j < np; ++j) {
    const double lam = lambda_lo * std::pow(lambda_hi / lambda_lo, static_cast<double>(j) / (np - 1));
    coarse.emplace_back(lam, probe(lam));
  }
  if (coarse.front().second == coarse.back().second) {
    std::ostringstream os;
    os << "find_lambda_threshold: both ends " << (coarse.front().second ? "succeed" : "fail") << " for hump " << k;
    throw precondition_error(os.str());
  }
  int switches = 0;
  std::size_t at = 0;
  for (std::size_t j = 1; j < coarse.size(); ++j)
    if (coarse[j].second != coarse[j - 1].second) {
      ++switches;
      at = j;
    }
  if (switches > 1) {
    std::ostringstream os;
    os << "find_lambda_threshold: success predicate not monotone across the bracket:";
    for (const auto& [lam, ok] : coarse) os << " (" << lam << ", " << (ok ? "ok" : "fail") << ")";
    throw numerical_error(os.str());
  }
  out.success_above = coarse.back().second;
  double lo = coarse[at - 1].first, hi = coarse[at].first;
  for (int s = 0; s < steps; ++s) {
    const double mid = std::sqrt(lo * hi);
    const bool ok = probe(mid);
    if (ok == out.success_above) hi = mid;
    else lo = mid;
  }
  out.lambda = std::sqrt(lo * hi);
  out.lambda_success = out.success_above ? hi : lo;
  out.lambda_failure = out.success_above ? lo : hi;
  return out;
}

}  // namespace mgs
