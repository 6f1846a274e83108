#pragma once

// Nonlinearity f, its antiderivative F, and the sign structure
// 0 < alpha_1 < beta_1 < ... < alpha_n < beta_n that drives the hump count.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/quadrature.hpp"

namespace mgs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Detected sign-change points of f plus the derived xi_i (zeros of F) and
/// gamma_i (plateau heights with F > 0). Indices in the public API are 1-based
/// to match the hump numbering; storage is 0-based.
struct SignStructure {
  std::vector<double> alphas;  // - to + crossings
  std::vector<double> betas;   // + to - crossings; one shorter than alphas in the (A2)' shape
  std::vector<double> xis;
  std::vector<double> gammas;
  double search_max = 0.0;

  int n() const { return static_cast<int>(alphas.size()); }
  bool tail_positive() const { return betas.size() + 1 == alphas.size(); }
  double alpha(int k) const { return alphas.at(static_cast<std::size_t>(k - 1)); }
  double beta(int k) const {
    if (k == 0) return 0.0;
    const auto i = static_cast<std::size_t>(k - 1);
    return i < betas.size() ? betas[i] : kInf;
  }
  double xi(int k) const { return xis.at(static_cast<std::size_t>(k - 1)); }
  double gamma(int k) const { return gammas.at(static_cast<std::size_t>(k - 1)); }
  /// Largest finite height of interest: beta_n, or the search bound for (A2)'.
  double top() const { return betas.size() == alphas.size() && !betas.empty() ? betas.back() : search_max; }
};

class NonlinearityModel {
 public:
  enum class Kind { Polynomial, Factored, PiecewiseLinear, Callable };

  /// f(s) = sum_k c_k s^k for s > 0 (ascending coefficients).
  static NonlinearityModel polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) throw parse_error("polynomial model needs at least one coefficient");
    for (double c : coefficients)
      if (!std::isfinite(c)) throw parse_error("polynomial coefficient is not finite");
    NonlinearityModel m;
    m.kind_ = Kind::Polynomial;
    m.coeffs_ = std::move(coefficients);
    m.build_antiderivative();
    return m;
  }

  /// f(s) = scale * prod_i (s - roots_i) for s > 0.
  static NonlinearityModel factored(std::vector<double> roots, double scale) {
    if (roots.empty()) throw parse_error("factored model needs at least one root");
    if (!std::isfinite(scale) || scale == 0.0) throw parse_error("factored model scale must be finite and nonzero");
    std::vector<double> c{scale};
    for (double r : roots) {
      if (!std::isfinite(r)) throw parse_error("factored root is not finite");
      std::vector<double> next(c.size() + 1, 0.0);
      for (std::size_t k = 0; k < c.size(); ++k) {
        next[k + 1] += c[k];
        next[k] -= r * c[k];
      }
      c = std::move(next);
    }
    NonlinearityModel m;
    m.kind_ = Kind::Factored;
    m.roots_ = std::move(roots);
    m.scale_ = scale;
    m.coeffs_ = std::move(c);
    m.build_antiderivative();
    return m;
  }

  /// Linear interpolation through (s, f) knots, linear extrapolation past the
  /// last knot. F is computed by quadrature with the knots as breakpoints.
  static NonlinearityModel piecewise_linear(std::vector<std::pair<double, double>> knots, double quad_rtol = 1e-12) {
    if (knots.size() < 2) throw parse_error("piecewise_linear model needs at least two knots");
    std::sort(knots.begin(), knots.end());
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (!(knots[i].first > knots[i - 1].first)) throw parse_error("piecewise_linear knots must be strictly increasing");
    auto shared = std::make_shared<const std::vector<std::pair<double, double>>>(knots);
    std::vector<double> bps;
    for (const auto& k : knots)
      if (k.first > 0) bps.push_back(k.first);
    auto fn = [shared](double s) {
      const auto& kn = *shared;
      auto it = std::upper_bound(kn.begin(), kn.end(), s, [](double x, const auto& k) { return x < k.first; });
      std::size_t hi = static_cast<std::size_t>(it - kn.begin());
      hi = std::clamp<std::size_t>(hi, 1, kn.size() - 1);
      const auto& [s0, f0] = kn[hi - 1];
      const auto& [s1, f1] = kn[hi];
      return f0 + (f1 - f0) * (s - s0) / (s1 - s0);
    };
    NonlinearityModel m = callable("piecewise_linear", std::move(fn), std::move(bps), quad_rtol);
    m.kind_ = Kind::PiecewiseLinear;
    m.knots_ = std::move(knots);
    return m;
  }

  /// Arbitrary locally Lipschitz f given as a callable; F by adaptive Simpson.
  static NonlinearityModel callable(std::string name, std::function<double(double)> fn,
                                    std::vector<double> breakpoints = {}, double quad_rtol = 1e-12) {
    NonlinearityModel m;
    m.kind_ = Kind::Callable;
    m.name_ = std::move(name);
    m.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
    m.quad_rtol_ = quad_rtol;
    m.memoize_breakpoints(std::move(breakpoints));
    return m;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& roots() const { return roots_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  const std::string& name() const { return name_; }
  std::optional<double> cap() const { return cap_; }
  const std::optional<SignStructure>& structure() const { return structure_; }
  bool closed_form() const { return kind_ == Kind::Polynomial || kind_ == Kind::Factored; }

  const SignStructure& require_structure() const {
    if (!structure_) throw precondition_error("model has no detected sign structure; run analyze() first");
    return *structure_;
  }

  /// f with the s <= 0 extension and the optional truncation cap. Unchecked.
  double f(double s) const {
    if (s <= 0.0) return 0.0;
    if (cap_ && s > *cap_) s = *cap_;
    return raw_f(s);
  }

  /// Antiderivative with F(0) = 0; unchecked.
  double F(double u) const {
    if (u <= 0.0) return 0.0;
    if (cap_ && u > *cap_) return raw_F(*cap_) + raw_f(*cap_) * (u - *cap_);
    return raw_F(u);
  }

  NonlinearityModel with_structure(SignStructure s) const {
    NonlinearityModel m = *this;
    if (!m.closed_form()) {
      std::vector<double> bps;
      for (const auto& [x, _] : m.breakpoints_) bps.push_back(x);
      bps.insert(bps.end(), s.alphas.begin(), s.alphas.end());
      bps.insert(bps.end(), s.betas.begin(), s.betas.end());
      m.memoize_breakpoints(std::move(bps));
    }
    m.structure_ = std::move(s);
    return m;
  }

  NonlinearityModel with_cap(double cap) const {
    NonlinearityModel m = *this;
    m.cap_ = cap;
    return m;
  }

 private:
  NonlinearityModel() = default;

  double raw_f(double s) const {
    switch (kind_) {
      case Kind::Factored: {
        double p = scale_;
        for (double r : roots_) p *= (s - r);
        return p;
      }
      case Kind::Polynomial: {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
        return acc;
      }
      default:
        return (*fn_)(s);
    }
  }

  double raw_F(double u) const {
    if (closed_form()) {
      double acc = 0.0;
      for (auto it = anti_.rbegin(); it != anti_.rend(); ++it) acc = acc * u + *it;
      return acc;
    }
    // Start from the largest memoized breakpoint not above u.
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u,
                               [](double x, const auto& bp) { return x < bp.first; });
    double base_s = 0.0, base_F = 0.0;
    if (it != breakpoints_.begin()) {
      --it;
      base_s = it->first;
      base_F = it->second;
    }
    return base_F + integrate_raw(base_s, u);
  }

  double integrate_raw(double a, double b) const {
    auto g = [this](double s) { return s <= 0.0 ? 0.0 : (*fn_)(s); };
    return quad::adaptive_simpson(g, a, b, quad_rtol_);
  }

  void build_antiderivative() {
    anti_.assign(coeffs_.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) anti_[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  }

  void memoize_breakpoints(std::vector<double> bps) {
    std::erase_if(bps, [](double x) { return !(x > 0.0) || !std::isfinite(x); });
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    breakpoints_.clear();
    double prev = 0.0, acc = 0.0;
    for (double x : bps) {
      acc += integrate_raw(prev, x);
      breakpoints_.emplace_back(x, acc);
      prev = x;
    }
  }

  Kind kind_ = Kind::Polynomial;
  std::vector<double> coeffs_;
  std::vector<double> anti_;
  std::vector<double> roots_;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
  std::string name_;
  std::shared_ptr<const std::function<double(double)>> fn_;
  double quad_rtol_ = 1e-12;
  std::vector<std::pair<double, double>> breakpoints_;  // (s, F(s)) ascending
  std::optional<double> cap_;
  std::optional<SignStructure> structure_;
};

/// f(s), zero for s <= 0.
inline double eval_f(const NonlinearityModel& model, double s) {
  if (!std::isfinite(s)) throw domain_error("eval_f: argument is not finite");
  return model.f(s);
}

/// F(u) = int_0^u f.
inline double eval_F(const NonlinearityModel& model, double u) {
  if (!std::isfinite(u)) throw domain_error("eval_F: argument is not finite");
  return model.F(u);
}

namespace detail {

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Bisection for a sign change of g on [lo, hi] (g(lo), g(hi) of opposite sign).
template <class G>
double bisect_root(const G& g, double lo, double hi, double rel_tol) {
  int slo = sign_of(g(lo));
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    const int sm = sign_of(g(mid));
    if (sm == 0) return mid;
    if (sm == slo) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// All sign changes of f in (0, search_max], split into alphas (- to +) and
/// betas (+ to -). Tangential zeros are not sign changes.
inline SignStructure detect_sign_structure(const NonlinearityModel& model, double search_max,
                                           const NonlinearityConfig& cfg = {}) {
  if (!(search_max > 0.0) || !std::isfinite(search_max)) throw domain_error("detect_sign_structure: search_max must be positive");
  if (cfg.scan_points < 2) throw domain_error("detect_sign_structure: scan_points must be at least 2");
  auto f = [&](double s) { return model.f(s); };

  SignStructure out;
  out.search_max = search_max;
  int last_sign = 0;
  double last_s = 0.0;
  int first_sign = 0;
  bool seen_positive = false;
  for (int j = 1; j <= cfg.scan_points; ++j) {
    const double s = search_max * static_cast<double>(j) / cfg.scan_points;
    const int sg = detail::sign_of(f(s));
    if (sg == 0) continue;
    if (sg > 0) seen_positive = true;
    if (first_sign == 0) first_sign = sg;
    if (last_sign != 0 && sg != last_sign) {
      const double root = detail::bisect_root(f, last_s, s, cfg.root_tol);
      (sg > 0 ? out.alphas : out.betas).push_back(root);
    }
    last_sign = sg;
    last_s = s;
  }
  if (!seen_positive) throw structure_error("no positive hump: f is never positive in (0, search_max]");
  if (first_sign > 0) throw structure_error("f is positive next to 0: no negative leading interval, violates (A2)");
  // Alternation -,+,-,+,... starting negative means alphas and betas interlace
  // with alphas first; the counts differ by one exactly in the (A2)' shape.
  return out;
}

/// Zero of F inside (alpha_k, beta_k), 1 <= k <= n.
inline double find_xi(const NonlinearityModel& model, const SignStructure& st, int k, const NonlinearityConfig& cfg = {}) {
  if (k < 1 || k > st.n()) throw domain_error("find_xi: hump index out of range");
  const double lo = st.alpha(k);
  double hi = st.beta(k);
  auto F = [&](double u) { return model.F(u); };
  if (!(F(lo) < 0.0)) {
    std::ostringstream os;
    os << "find_xi: F(alpha_" << k << ") = " << F(lo) << " is not negative, no sign change of F in hump " << k;
    throw assumption_error(os.str());
  }
  if (!std::isfinite(hi)) {
    hi = std::max(2.0 * lo, st.search_max);
    for (int it = 0; it < 200 && !(F(hi) > 0.0); ++it) hi *= 2.0;
  }
  if (!(F(hi) > 0.0)) {
    std::ostringstream os;
    os << "find_xi: F does not become positive in hump " << k << " (F(" << hi << ") = " << F(hi) << ")";
    throw assumption_error(os.str());
  }
  return detail::bisect_root(F, lo, hi, cfg.root_tol);
}

/// detect_sign_structure + find_xi + default gammas, attached to the model.
inline NonlinearityModel analyze(const NonlinearityModel& model, double search_max, const NonlinearityConfig& cfg = {}) {
  SignStructure st = detect_sign_structure(model, search_max, cfg);
  for (int k = 1; k <= st.n(); ++k) {
    const double xi = find_xi(model, st, k, cfg);
    st.xis.push_back(xi);
    const double b = st.beta(k);
    // (A2)' tail hump: any height above xi has F > 0; step out by xi - alpha.
    const double gamma = std::isfinite(b) ? xi + cfg.gamma_fraction * (b - xi) : xi + (xi - st.alpha(k));
    st.gammas.push_back(gamma);
  }
  return model.with_structure(std::move(st));
}

struct AssumptionEntry {
  std::string assumption;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct AssumptionReport {
  int N = 0;
  std::vector<AssumptionEntry> entries;

  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
  }
  const AssumptionEntry& at(const std::string& id) const {
    for (const auto& e : entries)
      if (e.assumption == id) return e;
    throw domain_error("no assumption entry " + id);
  }
};

/// One pass/fail entry per (A1)..(A5). Failures are entries, never errors.
inline AssumptionReport verify_assumptions(const NonlinearityModel& model, int N, const NonlinearityConfig& cfg = {}) {
  AssumptionReport rep;
  rep.N = N;
  const SignStructure& st = model.require_structure();
  const int n = st.n();
  auto f = [&](double s) { return model.f(s); };
  auto F = [&](double s) { return model.F(s); };
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  };

  {  // A1: f(0) = 0, finite and with finite difference quotients on the scan grid.
    AssumptionEntry e{"A1", true, false, ""};
    const double f0 = model.f(0.0);  // extension value
    const double eps = 1e-9 * st.search_max;
    const double near0 = f(eps);
    double lip = 0.0;
    double prev = 0.0;
    for (int j = 1; j <= cfg.scan_points; ++j) {
      const double s = st.search_max * j / cfg.scan_points;
      const double v = f(s);
      if (!std::isfinite(v)) {
        e.pass = false;
        e.detail = "f not finite at s=" + num(s);
        break;
      }
      lip = std::max(lip, std::abs(v - prev) / (st.search_max / cfg.scan_points));
      prev = v;
    }
    if (e.pass) {
      // Continuity at 0 from the right: f(eps) must be O(eps).
      const bool cont = std::abs(near0) <= std::max(1.0, lip) * eps * 10.0 + 1e-12;
      e.pass = f0 == 0.0 && cont && std::isfinite(lip);
      e.detail = "f(0)=0, f(0+)=" + num(near0) + ", grid Lipschitz estimate " + num(lip);
    }
    rep.entries.push_back(e);
  }

  {  // A2 / A2': strict signs on every open interval between consecutive roots.
    AssumptionEntry e{st.tail_positive() ? "A2'" : "A2", true, false, ""};
    std::vector<double> pts{0.0};
    for (int k = 1; k <= n; ++k) {
      pts.push_back(st.alpha(k));
      pts.push_back(st.beta(k));
    }
    if (st.tail_positive()) pts.back() = st.search_max;
    bool interlaced = st.betas.size() == st.alphas.size() || st.tail_positive();
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i] > pts[i - 1])) interlaced = false;
    if (!interlaced) {
      e.pass = false;
      e.detail = "alphas/betas do not interlace";
    }
    constexpr int samples = 64;
    for (std::size_t i = 0; e.pass && i + 1 < pts.size(); ++i) {
      const int want = (i % 2 == 0) ? -1 : 1;
      for (int j = 0; j < samples; ++j) {
        const double s = pts[i] + (pts[i + 1] - pts[i]) * (j + 0.5) / samples;
        if (detail::sign_of(f(s)) != want) {
          e.pass = false;
          e.detail = "f has wrong sign at s=" + num(s);
          break;
        }
      }
    }
    if (e.pass) e.detail = "n=" + std::to_string(n) + (st.tail_positive() ? ", positive tail past alpha_n" : "");
    rep.entries.push_back(e);
  }

  {  // A3: xi_k in (alpha_k, beta_k) with F(xi_k) = 0 and a sign change.
    AssumptionEntry e{"A3", true, false, ""};
    if (static_cast<int>(st.xis.size()) != n) {
      e.pass = false;
      e.detail = "xi not computed for every hump";
    }
    for (int k = 1; e.pass && k <= n; ++k) {
      const double xi = st.xi(k);
      const double w = 1e-6 * std::max(1.0, xi);
      const bool inside = xi > st.alpha(k) && xi < st.beta(k);
      const bool changes = F(xi - w) < 0.0 && F(xi + w) > 0.0;
      const double scale = std::max(1.0, std::abs(F(st.alpha(k))));
      const bool zero = std::abs(F(xi)) <= 1e-8 * scale;
      if (!(inside && changes && zero)) {
        e.pass = false;
        e.detail = "xi_" + std::to_string(k) + "=" + num(xi) + " fails";
      }
    }
    if (e.pass) e.detail = "xi located in every hump";
    rep.entries.push_back(e);
  }

  {  // A4: F(beta_{i-1}) < F(beta_i), beta_0 = 0, strict.
    AssumptionEntry e{"A4", true, false, ""};
    for (int k = 1; e.pass && k <= n; ++k) {
      const double lo = F(st.beta(k - 1));
      const double bk = st.beta(k);
      const double hi = std::isfinite(bk) ? F(bk) : F(st.search_max);
      if (!(lo < hi)) {
        e.pass = false;
        e.detail = "F(beta_" + std::to_string(k - 1) + ")=" + num(lo) + " >= F(beta_" + std::to_string(k) + ")=" + num(hi);
      }
    }
    if (e.pass) e.detail = st.tail_positive() ? "strict; F(search_max) stands in for F(beta_n)" : "strict";
    rep.entries.push_back(e);
  }

  {  // A5: one-sided difference quotients at alpha_i and beta_j, N >= 3 only.
    AssumptionEntry e{"A5", true, false, ""};
    if (N < 3) {
      e.skipped = true;
      e.detail = "not required for N=2";
    } else {
      constexpr double offsets[] = {1e-3, 1e-4, 1e-5};
      auto check = [&](double root, double sign, const std::string& label) {
        double qs[3];
        for (int i = 0; i < 3; ++i) {
          const double d = offsets[i];
          qs[i] = sign * f(root + d) / d;
        }
        const bool floor_ok = qs[0] > cfg.a5_floor && qs[1] > cfg.a5_floor && qs[2] > cfg.a5_floor;
        const bool no_collapse = qs[2] >= cfg.a5_collapse_ratio * qs[0];
        if (!(floor_ok && no_collapse) && e.pass) {
          e.pass = false;
          e.detail = label + " quotients " + num(qs[0]) + ", " + num(qs[1]) + ", " + num(qs[2]);
        }
      };
      for (int k = 1; k <= n; ++k) check(st.alpha(k), 1.0, "alpha_" + std::to_string(k));
      for (int k = 1; k <= n - 1; ++k) check(st.beta(k), -1.0, "beta_" + std::to_string(k));
      if (e.pass) e.detail = "offsets 1e-3,1e-4,1e-5; floor " + num(cfg.a5_floor);
    }
    rep.entries.push_back(e);
  }
  return rep;
}

/// f_i: f below beta_i, the constant f(beta_i) above. Identity for the
/// unbounded (A2)' tail hump.
inline NonlinearityModel truncate(const NonlinearityModel& model, int i) {
  const SignStructure& st = model.require_structure();
  if (i < 1 || i > st.n()) throw domain_error("truncate: hump index out of range");
  const double b = st.beta(i);
  if (!std::isfinite(b)) return model;
  return model.with_cap(b);
}

}  // namespace mgs
