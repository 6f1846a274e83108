// mgs: command-line driver for the ground-state solvers.
//
// Exit codes: 0 ok, 1 usage/parse/precondition, 2 assumption failure,
// 3 multiplicity not reached, 4 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mgs/mgs.hpp"

namespace fs = std::filesystem;
using mgs::json;

namespace {

struct Common {
  std::string model_path;
  int N = 3;
  double lambda = 1.0;
  std::string out_dir;
  mgs::NonlinearityConfig ncfg;
  mgs::SolverOptions opt;
  std::optional<double> rmax, r0, decay_tol, rho;
};

void add_common(CLI::App* app, Common& c, bool needs_lambda = true) {
  app->add_option("--model", c.model_path, "model JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--N", c.N, "space dimension")->check(CLI::Range(2, 1000));
  if (needs_lambda) app->add_option("--lambda", c.lambda, "parameter lambda > 0")->check(CLI::PositiveNumber);
  app->add_option("--rtol", c.opt.ode.rel, "ODE relative tolerance")->check(CLI::PositiveNumber);
  app->add_option("--atol", c.opt.ode.abs, "ODE absolute tolerance")->check(CLI::PositiveNumber);
  app->add_option("--rmax", c.rmax, "integration radius")->check(CLI::PositiveNumber);
  app->add_option("--r0", c.r0, "series start radius")->check(CLI::PositiveNumber);
  app->add_option("--root-tol", c.ncfg.root_tol, "relative root tolerance")->check(CLI::PositiveNumber);
  app->add_option("--zeta-tol", c.opt.shooting.zeta_tol, "relative bisection tolerance on zeta")->check(CLI::PositiveNumber);
  app->add_option("--decay-tol", c.decay_tol, "ground-state decay tolerance")->check(CLI::PositiveNumber);
  app->add_option("--opt-tol", c.opt.variational.opt_tol, "variational stationarity tolerance")->check(CLI::PositiveNumber);
  app->add_option("--rho", c.rho, "variational ball radius")->check(CLI::PositiveNumber);
  app->add_option("--mesh", c.opt.variational.mesh, "variational mesh intervals")->check(CLI::Range(16, 1 << 24));
  app->add_option("--out", c.out_dir, "directory for reports and profiles");
}

void resolve(Common& c) {
  c.opt.shooting.r_max = c.rmax;
  c.opt.shooting.r0 = c.r0;
  c.opt.shooting.decay_tol = c.decay_tol;
  c.opt.shooting.rho = c.rho;
  if (!c.out_dir.empty()) {
    fs::create_directories(c.out_dir);
    const auto probe = fs::path(c.out_dir) / ".mgs-write-test";
    std::ofstream t(probe);
    if (!t) throw mgs::domain_error("output directory not writable: " + c.out_dir);
    t.close();
    fs::remove(probe);
  }
}

void write_file(const Common& c, const std::string& name, const std::string& text) {
  if (c.out_dir.empty()) return;
  std::ofstream f(fs::path(c.out_dir) / name, std::ios::binary);
  if (!f) throw mgs::domain_error("cannot write " + name);
  f << text;
}

json header(const Common& c, const mgs::ModelFile& mf, const std::string& command) {
  json h;
  h["tool"] = "mgs";
  h["version"] = mgs::kToolVersion;
  h["command"] = command;
  h["model"] = {{"path", c.model_path}, {"name", mf.name}, {"source", mf.source}};
  h["structure"] = mgs::to_json(mf.model.require_structure());
  return h;
}

json config_echo(const Common& c, const mgs::ShootingProblem& p) {
  json j = mgs::resolved_config(p, c.opt);
  j["nonlinearity"] = mgs::to_json(c.ncfg);
  return j;
}

int exit_code(const mgs::Error& e) {
  switch (e.kind()) {
    case mgs::ErrorKind::Structure:
    case mgs::ErrorKind::Assumption: return 2;
    case mgs::ErrorKind::Multiplicity: return 3;
    case mgs::ErrorKind::Numerical: return 4;
    default: return 1;
  }
}

int run_check(Common& c) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto rep = mgs::verify_assumptions(mf.model, c.N, c.ncfg);
  json j = header(c, mf, "check");
  j["config"] = {{"N", c.N}, {"nonlinearity", mgs::to_json(c.ncfg)}};
  j["assumptions"] = mgs::to_json(rep);
  const auto text = mgs::dump(j);
  write_file(c, "check.json", text);
  std::cout << text;
  return rep.all_pass() ? 0 : 2;
}

int run_solve(Common& c) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto rep = mgs::verify_assumptions(mf.model, c.N, c.ncfg);
  const auto p = mgs::ShootingProblem::make(c.N, c.lambda, mf.model);
  json j = header(c, mf, "solve");
  j["config"] = config_echo(c, p);
  j["assumptions"] = mgs::to_json(rep);
  if (!rep.all_pass()) {
    const auto text = mgs::dump(j);
    write_file(c, "solve.json", text);
    std::cout << text;
    std::cerr << "mgs: assumptions fail, not solving\n";
    return 2;
  }

  const auto res = mgs::solve_all(p, c.opt);
  json gs = json::array();
  for (const auto& g : res.ground_states) {
    gs.push_back(mgs::to_json(g, c.opt.ode));
    write_file(c, "profile_k" + std::to_string(g.k) + ".csv", mgs::trajectory_csv(g.profile));
  }
  j["ground_states"] = gs;
  json fails = json::array();
  for (const auto& [k, why] : res.failures) fails.push_back({{"k", k}, {"reason", why}});
  j["failures"] = fails;

  json var = json::array();
  const double rho = c.opt.rho(p);
  const auto& st = mf.model.require_structure();
  for (int k = 1; k <= st.n(); ++k) {
    if (!(rho > 2.0 * st.gamma(k))) {
      var.push_back({{"hump", k}, {"skipped", "rho <= 2 gamma_k"}});
      continue;
    }
    const auto vp = mgs::VariationalProblem::make(c.N, c.lambda, rho, k, mf.model, c.opt.variational.mesh);
    const auto r = mgs::minimize_J(vp, mgs::plateau_profile(st.gamma(k), vp), c.opt.variational);
    var.push_back(mgs::to_json(r, vp));
  }
  j["variational"] = var;

  const auto text = mgs::dump(j);
  write_file(c, "solve.json", text);
  std::cout << text;
  for (const auto& f : res.failures) std::cerr << "mgs: " << f.second << "\n";
  return res.complete() ? 0 : 3;
}

int run_classify(Common& c, double zeta) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto p = mgs::ShootingProblem::make(c.N, c.lambda, mf.model);
  const double r_max = c.opt.r_max(p);
  const auto tr = mgs::integrate(p, zeta, r_max, c.opt.ode, c.opt.integrate_options(true));
  json j = header(c, mf, "classify");
  j["config"] = config_echo(c, p);
  j["classification"] = mgs::to_json(mgs::classify(p, zeta, r_max, c.opt));
  j["energy_residual"] = mgs::energy_residual(p, tr, zeta);
  j["terminal"] = mgs::to_json(tr.terminal);
  const auto text = mgs::dump(j);
  write_file(c, "classify.json", text);
  write_file(c, "trajectory.csv", mgs::trajectory_csv(tr));
  std::cout << text;
  return 0;
}

int run_sweep(Common& c, int hump, int grid) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto p = mgs::ShootingProblem::make(c.N, c.lambda, mf.model);
  const auto rows = mgs::sweep_zeta(p, hump, grid, c.opt);
  std::string csv = "zeta,verdict,radius,u_end,slope_end,ambiguous\n";
  for (const auto& r : rows)
    csv += mgs::shortest(r.zeta) + ',' + mgs::to_string(r.verdict) + ',' + mgs::shortest(r.radius) + ',' +
           mgs::shortest(r.u_end) + ',' + mgs::shortest(r.slope_end) + ',' + (r.ambiguous ? "1" : "0") + '\n';
  json j = header(c, mf, "sweep");
  j["config"] = config_echo(c, p);
  j["hump"] = hump;
  j["grid"] = grid;
  write_file(c, "sweep_k" + std::to_string(hump) + ".json", mgs::dump(j));
  write_file(c, "sweep_k" + std::to_string(hump) + ".csv", csv);
  std::cout << csv;
  return 0;
}

int run_variational(Common& c, int hump) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto p = mgs::ShootingProblem::make(c.N, c.lambda, mf.model);
  const double rho = c.opt.rho(p);
  const auto& st = mf.model.require_structure();
  if (hump < 1 || hump > st.n()) throw mgs::domain_error("hump index out of range");
  const auto vp = mgs::VariationalProblem::make(c.N, c.lambda, rho, hump, mf.model, c.opt.variational.mesh);
  const auto init = mgs::plateau_profile(st.gamma(hump), vp);
  const auto r = mgs::minimize_J(vp, init, c.opt.variational);
  json j = header(c, mf, "variational");
  j["config"] = config_echo(c, p);
  j["J_plateau"] = mgs::eval_J(vp, init);
  j["result"] = mgs::to_json(r, vp);
  const auto ch = mgs::center_height(vp, r.profile);
  if (ch.accepted) j["center_classification"] = mgs::to_json(mgs::classify(p, ch.value, c.opt.r_max(p), c.opt));
  std::string csv = "r,v\n";
  for (int i = 0; i <= vp.M; ++i) csv += mgs::shortest(i * vp.h()) + ',' + mgs::shortest(r.profile.v[i]) + '\n';
  const auto text = mgs::dump(j);
  write_file(c, "variational_k" + std::to_string(hump) + ".json", text);
  write_file(c, "variational_k" + std::to_string(hump) + ".csv", csv);
  std::cout << text;
  return 0;
}

int run_threshold(Common& c, int hump, double lo, double hi, int steps) {
  const auto mf = mgs::load_model(c.model_path, c.ncfg);
  const auto p = mgs::ShootingProblem::make(c.N, lo, mf.model);
  const auto t = mgs::find_lambda_threshold(p, hump, lo, hi, steps, c.opt);
  json j = header(c, mf, "threshold");
  json cfg = config_echo(c, p);
  cfg.erase("lambda");
  cfg["lambda_range"] = {lo, hi};
  j["config"] = cfg;
  j["threshold"] = mgs::to_json(t);
  const auto text = mgs::dump(j);
  write_file(c, "threshold_k" + std::to_string(hump) + ".json", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial ground states of the Minkowski mean curvature equation"};
  app.set_version_flag("--version", mgs::kToolVersion);
  app.require_subcommand(1);

  Common c;
  double zeta = 0.0;
  int hump = 1, grid = 512, steps = 20;
  double lam_lo = 0.0, lam_hi = 0.0;

  auto* check = app.add_subcommand("check", "verify (A1)-(A5) for a model");
  add_common(check, c, false);
  auto* solve = app.add_subcommand("solve", "one ground state per hump");
  add_common(solve, c);
  auto* cls = app.add_subcommand("classify", "classify one initial height");
  add_common(cls, c);
  cls->add_option("--zeta", zeta, "initial height")->required()->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "classification atlas over a hump");
  add_common(sweep, c);
  sweep->add_option("--hump", hump, "hump index")->required();
  sweep->add_option("--grid", grid, "number of heights")->check(CLI::Range(2, 1 << 24));
  auto* var = app.add_subcommand("variational", "discrete minimisation of the truncated functional");
  add_common(var, c);
  var->add_option("--hump", hump, "hump index")->required();
  auto* thr = app.add_subcommand("threshold", "probe the lambda at which a hump starts or stops resolving");
  add_common(thr, c, false);
  thr->add_option("--hump", hump, "hump index")->required();
  thr->add_option("--lambda-lo", lam_lo, "lower end of the lambda bracket")->required()->check(CLI::PositiveNumber);
  thr->add_option("--lambda-hi", lam_hi, "upper end of the lambda bracket")->required()->check(CLI::PositiveNumber);
  thr->add_option("--steps", steps, "bisection steps")->check(CLI::Range(0, 200));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    resolve(c);
    if (*check) return run_check(c);
    if (*solve) return run_solve(c);
    if (*cls) return run_classify(c, zeta);
    if (*sweep) return run_sweep(c, hump, grid);
    if (*var) return run_variational(c, hump);
    if (*thr) return run_threshold(c, hump, lam_lo, lam_hi, steps);
  } catch (const mgs::Error& e) {
    std::cerr << "mgs: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "mgs: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
