#pragma once

// Model files, JSON reports and CSV profiles.
//
// Model file shapes:
//   {"type": "polynomial", "coefficients": [c0, c1, ...]}        ascending powers
//   {"type": "factored", "roots": [...], "scale": s}
//   {"type": "piecewise_linear", "knots": [[s0, f0], [s1, f1], ...]}
// with optional "name" and "search_max" (upper end of the root scan).

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "mgs/config.hpp"
#include "mgs/errors.hpp"
#include "mgs/nonlinearity.hpp"
#include "mgs/radial_ivp.hpp"
#include "mgs/shooting.hpp"
#include "mgs/variational.hpp"

namespace mgs {

inline constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::ordered_json;

/// Shortest decimal that reads back to the same double.
inline std::string shortest(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// JSON has no infinities; they are written as the strings "inf"/"-inf".
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return shortest(x);
}

struct ModelFile {
  std::string name;
  double search_max = 0.0;
  NonlinearityModel model;  // analyzed: sign structure, xi and gamma attached
  json source;              // the parsed document, echoed into reports
};

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw parse_error(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(where + ": missing field \"" + key + "\"");
  return *it;
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw parse_error(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw parse_error(where + ": number is not finite");
  return x;
}

inline std::vector<double> as_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw parse_error(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "/" + std::to_string(i)));
  return out;
}

/// Twice the Cauchy bound on the positive roots, at least 1.
inline double default_search_max(const NonlinearityModel& m) {
  const auto& c = m.coefficients();
  if (!c.empty() && c.back() != 0.0) {
    double bound = 0.0;
    for (std::size_t k = 0; k + 1 < c.size(); ++k) bound = std::max(bound, std::abs(c[k] / c.back()));
    return 2.0 * (1.0 + bound);
  }
  if (!m.knots().empty()) return std::max(1.0, 2.0 * m.knots().back().first);
  return 1.0;
}

}  // namespace detail

/// Parse and analyze a model document. `origin` names the input in errors.
inline ModelFile parse_model(const std::string& text, const std::string& origin = "<model>",
                             const NonlinearityConfig& cfg = {}) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(origin + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const std::string root = origin + ":";
  const json& type = detail::require(doc, "type", root);
  if (!type.is_string()) throw parse_error(root + "/type: expected a string");
  const std::string t = type.get<std::string>();

  const std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : t;
  auto build = [&]() -> NonlinearityModel {
    if (t == "polynomial") {
      const auto c = detail::as_numbers(detail::require(doc, "coefficients", root), root + "/coefficients");
      if (c.empty()) throw parse_error(root + "/coefficients: empty");
      return NonlinearityModel::polynomial(c);
    }
    if (t == "factored") {
      const auto r = detail::as_numbers(detail::require(doc, "roots", root), root + "/roots");
      if (r.empty()) throw parse_error(root + "/roots: empty");
      const double s = doc.contains("scale") ? detail::as_number(doc["scale"], root + "/scale") : 1.0;
      return NonlinearityModel::factored(r, s);
    }
    if (t == "piecewise_linear") {
      const json& kn = detail::require(doc, "knots", root);
      if (!kn.is_array()) throw parse_error(root + "/knots: expected an array");
      std::vector<std::pair<double, double>> knots;
      for (std::size_t i = 0; i < kn.size(); ++i) {
        const auto where = root + "/knots/" + std::to_string(i);
        const auto pair = detail::as_numbers(kn[i], where);
        if (pair.size() != 2) throw parse_error(where + ": expected [s, f]");
        knots.emplace_back(pair[0], pair[1]);
      }
      return NonlinearityModel::piecewise_linear(knots, cfg.quad_rtol);
    }
    throw parse_error(root + "/type: unknown model type \"" + t + "\"");
  };
  auto model = [&] {
    try {
      return build();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Parse) throw;
      const std::string msg = e.what();
      throw parse_error(msg.rfind(origin, 0) == 0 ? msg : root + " " + msg);
    }
  }();

  const double search_max = doc.contains("search_max") ? detail::as_number(doc["search_max"], root + "/search_max")
                                                       : detail::default_search_max(model);
  if (!(search_max > 0.0)) throw parse_error(root + "/search_max: must be positive");
  return ModelFile{name, search_max, analyze(model, search_max, cfg), doc};
}

inline ModelFile load_model(const std::string& path, const NonlinearityConfig& cfg = {}) {
  std::ifstream in(path);
  if (!in) throw parse_error(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path, cfg);
}

// ---- JSON encoders -------------------------------------------------------

inline json to_json(const SignStructure& st) {
  json j;
  auto arr = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  j["n"] = st.n();
  j["alpha"] = arr(st.alphas);
  j["beta"] = arr(st.betas);
  j["xi"] = arr(st.xis);
  j["gamma"] = arr(st.gammas);
  j["tail_positive"] = st.tail_positive();
  j["search_max"] = num(st.search_max);
  return j;
}

inline json to_json(const AssumptionReport& rep) {
  json j;
  j["N"] = rep.N;
  j["all_pass"] = rep.all_pass();
  json es = json::array();
  for (const auto& e : rep.entries)
    es.push_back({{"assumption", e.assumption}, {"pass", e.pass}, {"skipped", e.skipped}, {"detail", e.detail}});
  j["entries"] = es;
  return j;
}

inline json to_json(const OdeTolerances& t) {
  return {{"rtol", t.rel},         {"atol", t.abs},           {"event_tol", t.event},
          {"event_floor", t.event_floor}, {"min_step", t.min_step}, {"max_steps", t.max_steps}};
}

inline json to_json(const NonlinearityConfig& c) {
  return {{"scan_points", c.scan_points}, {"root_tol", c.root_tol}, {"quad_rtol", c.quad_rtol},
          {"a5_floor", c.a5_floor}, {"a5_collapse_ratio", c.a5_collapse_ratio}, {"gamma_fraction", c.gamma_fraction}};
}

inline json to_json(const VariationalConfig& c) {
  return {{"mesh", c.mesh},           {"opt_tol", c.opt_tol},         {"max_iters", c.max_iters},
          {"armijo_factor", c.armijo_factor}, {"armijo_sigma", c.armijo_sigma}, {"initial_step", c.initial_step},
          {"max_backtracks", c.max_backtracks}};
}

/// Shooting settings with every default resolved against the problem.
inline json resolved_config(const ShootingProblem& p, const SolverOptions& o) {
  json s;
  s["zeta_tol"] = o.shooting.zeta_tol;
  s["decay_tol"] = o.decay_tol(p);
  s["tail_fraction"] = o.shooting.tail_fraction;
  s["r_max"] = o.r_max(p);
  s["r0"] = o.shooting.r0 ? json(*o.shooting.r0) : json("default: 1e-6*max(1,zeta), capped so |q(r0)| <= 1e-3");
  s["rho"] = o.rho(p);
  s["scan_points"] = o.shooting.scan_points;
  s["geometric_points"] = o.shooting.geometric_points;
  s["max_bisections"] = o.shooting.max_bisections;
  s["threshold_probe_points"] = o.shooting.threshold_probe_points;
  return {{"N", p.N}, {"lambda", p.lambda}, {"ode", to_json(o.ode)}, {"shooting", s}, {"variational", to_json(o.variational)}};
}

inline json to_json(const TerminalEvent& t) {
  return {{"kind", to_string(t.kind)}, {"radius", num(t.radius)}, {"ambiguous", t.ambiguous}, {"detail", t.detail}};
}

inline json to_json(const Classification& c) {
  json j;
  j["zeta"] = c.zeta;
  j["verdict"] = to_string(c.verdict);
  j["radius"] = num(c.radius);
  j["u_end"] = num(c.u_end);
  j["slope_end"] = num(c.slope_end);
  j["ambiguous"] = c.ambiguous;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

inline json to_json(const Trajectory& tr) {
  json j;
  j["zeta"] = tr.zeta;
  j["terminal"] = to_json(tr.terminal);
  j["steps"] = tr.steps;
  json rs = json::array(), us = json::array(), ups = json::array(), qs = json::array(), es = json::array();
  for (const auto& s : tr.samples) {
    rs.push_back(num(s.r));
    us.push_back(num(s.u));
    ups.push_back(num(s.uprime()));
    qs.push_back(num(s.q));
    es.push_back(num(s.E));
  }
  j["r"] = rs;
  j["u"] = us;
  j["uprime"] = ups;
  j["q"] = qs;
  j["E"] = es;
  return j;
}

inline std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "r,u,uprime,q,E\n";
  for (const auto& s : tr.samples) {
    out += shortest(s.r) + ',' + shortest(s.u) + ',' + shortest(s.uprime()) + ',' + shortest(s.q) + ',' +
           shortest(s.E) + '\n';
  }
  return out;
}

/// Ground-state summary; the profile itself goes to CSV.
inline json to_json(const GroundState& g, const OdeTolerances& tol) {
  json j;
  j["k"] = g.k;
  j["zeta_star"] = g.zeta_star;
  j["zeta_plus"] = g.zeta_plus;
  j["zeta_minus"] = g.zeta_minus;
  j["bracket_width"] = g.bracket_width;
  j["bisections"] = g.bisections;
  j["seed"] = g.seed_source;
  j["lambda"] = g.lambda;
  j["r_max"] = g.r_max;
  j["terminal_height"] = g.terminal_height;
  j["decay_tol"] = g.decay_tol;
  j["energy_residual"] = g.energy_residual;
  j["min_slope_margin"] = g.min_slope_margin;
  j["tail_rate"] = g.tail_rate;
  j["tail_rate_bound"] = g.tail_rate_bound;
  j["samples"] = g.profile.samples.size();
  j["midpoint_fate"] = {{"verdict", to_string(g.midpoint_fate)}, {"radius", num(g.midpoint_fate_radius)}};
  j["computed_under"] = {{"rtol", tol.rel}, {"atol", tol.abs}};
  return j;
}

inline json to_json(const MinimizeResult& r, const VariationalProblem& vp) {
  const auto ch = center_height(vp, r.profile);
  json j;
  j["hump"] = vp.i;
  j["rho"] = vp.rho;
  j["mesh"] = vp.M;
  j["J_init"] = r.J_init;
  j["J"] = r.J;
  j["converged"] = r.converged;
  j["stalled"] = r.stalled;
  j["iterations"] = r.iterations;
  j["stationarity"] = r.stationarity;
  j["nonnegative"] = r.nonnegative;
  j["max_v"] = r.profile.max();
  j["escape"] = vp.i > 1 ? json(check_escape(vp, r.profile)) : json(nullptr);  // nothing below hump 1 to escape
  j["center_height"] = ch.value;
  j["center_accepted"] = ch.accepted;
  return j;
}

inline json to_json(const ThresholdResult& t) {
  json j;
  j["k"] = t.k;
  j["lambda"] = t.lambda;
  j["lambda_success"] = t.lambda_success;
  j["lambda_failure"] = t.lambda_failure;
  j["success_side"] = t.success_above ? "above" : "below";
  j["steps"] = t.steps;
  json s = json::array();
  for (const auto& x : t.samples) s.push_back({{"lambda", x.lambda}, {"success", x.success}, {"detail", x.detail}});
  j["samples"] = s;
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace mgs
