// Command-line front end: evaluates quasi-local mass functionals, solves the
// optimal-embedding problem, runs second-variation checks, comparison checks,
// parameter sweeps, convergence studies, and regression suites driven by
// declarative JSON configs.

#include "qlm/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

using namespace qlm;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitExpectationFailure = 1;
constexpr int kExitUsageOrParse = 2;

struct GlobalOptions {
  std::string config;
  int lmax = 0;  // 0 -> per-scenario default
  std::string out_dir;
  std::string format = "csv";
  int jobs = 1;
  unsigned long seed = 0;
};

void add_common_flags(CLI::App* cmd, GlobalOptions& opt, bool config_required = true) {
  auto* c = cmd->add_option("--config", opt.config, "JSON config file");
  if (config_required) c->required();
  cmd->add_option("--lmax", opt.lmax, "override the grid band limit");
  cmd->add_option("--out-dir", opt.out_dir,
                  "output directory (default: $QLM_OUT_DIR or current directory)");
  cmd->add_option("--format", opt.format, "report format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--jobs", opt.jobs, "worker threads for suites")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "seed for randomized probes");
}

std::string out_path(const GlobalOptions& opt, const std::string& file) {
  std::string dir = opt.out_dir;
  if (dir.empty())
    if (const char* env = std::getenv("QLM_OUT_DIR")) dir = env;
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / file).string();
}

json load_config(const GlobalOptions& opt,
                 std::initializer_list<const char*> allowed_keys) {
  json j = read_json_file(opt.config);
  detail::require_keys(j, allowed_keys, "top-level config");
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kConfigSchemaVersion)
    throw std::invalid_argument("config: missing or unsupported schema_version");
  return j;
}

Scenario load_scenario(const json& j) { return scenario_from_json(j.at("scenario")); }

GridPtr scenario_grid(const Scenario& s, const GlobalOptions& opt) {
  return SphereGrid::make(opt.lmax > 0 ? opt.lmax : s.lmax);
}

ScalarField tau_from_spec(const Scenario& s, const detail::BuiltCase& built,
                          const GridPtr& g) {
  if (s.tau == "zero") return ScalarField::zero(g);
  if (s.tau == "harmonics") return detail::synth_harmonics(g, s.tau_harmonics);
  if (s.tau == "own_time") {
    if (!built.has_own_time)
      throw std::invalid_argument("scenario " + s.id +
                                  ": family has no intrinsic time function");
    return built.own_time;
  }
  throw std::invalid_argument("unknown tau spec \"" + s.tau + "\"");
}

ScalarField random_bandlimited(const GridPtr& g, int lband, double amp,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  VectorXd c = VectorXd::Zero(g->ncoeff());
  for (int l = 0; l <= lband; ++l)
    for (int m = -l; m <= l; ++m) c[SphereGrid::index(l, m)] = amp * N(rng);
  return {g, g->synth(c)};
}

WeylOptions scenario_weyl(const Scenario& s) {
  WeylOptions w = energy_options();
  if (s.weyl_tol > 0.0) w.tol = s.weyl_tol;
  return w;
}

int cmd_compute(const GlobalOptions& opt) {
  json cfg = load_config(opt, {"schema_version", "scenario"});
  Scenario s = load_scenario(cfg);
  RunResult r = run_scenario(s, opt.lmax);
  for (const auto& [name, v] : r.values)
    std::cout << s.id << " " << name << " = " << format_double(v) << "\n";
  for (const auto& m : r.messages) std::cout << s.id << ": " << m << "\n";
  SuiteResult sr;
  sr.name = s.id;
  sr.results.push_back(r);
  sr.all_passed = r.passed;
  if (opt.format == "json")
    write_text_file(out_path(opt, s.id + ".json"), suite_report_json(sr).dump(2) + "\n");
  else
    write_text_file(out_path(opt, s.id + ".csv"), suite_csv(sr));
  return r.passed ? kExitPass : kExitExpectationFailure;
}

int cmd_solve_optimal(const GlobalOptions& opt) {
  json cfg = load_config(opt, {"schema_version", "scenario", "optimal"});
  Scenario s = load_scenario(cfg);
  auto g = scenario_grid(s, opt);
  detail::BuiltCase built = detail::build_case(s, g);
  OptimalOptions oo;
  oo.weyl = scenario_weyl(s);
  if (cfg.contains("optimal")) {
    const json& o = cfg.at("optimal");
    detail::require_keys(o, {"lband", "residual_tol", "max_iter"}, "optimal options");
    if (o.contains("lband")) oo.lband = o.at("lband").get<int>();
    if (o.contains("residual_tol")) oo.residual_tol = o.at("residual_tol").get<double>();
    if (o.contains("max_iter")) oo.max_iter = o.at("max_iter").get<int>();
  }
  CriticalPointReport rep = solve_optimal(built.data, tau_from_spec(s, built, g), oo);
  std::cout << s.id << " E* = " << format_double(rep.energy)
            << ", residual = " << format_double(rep.residual)
            << ", kernel dim = " << rep.kernel_dim
            << ", converged = " << (rep.converged ? "yes" : "no") << "\n";
  write_text_file(out_path(opt, s.id + "-critical-point.json"),
                  critical_point_report_to_json(rep).dump(2) + "\n");
  write_text_file(out_path(opt, s.id + "-hessian-spectrum.csv"),
                  spectrum_csv(rep.hessian_eigenvalues));
  return rep.converged ? kExitPass : kExitExpectationFailure;
}

int cmd_second_variation(const GlobalOptions& opt) {
  json cfg =
      load_config(opt, {"schema_version", "scenario", "direction", "basis_limit"});
  Scenario s = load_scenario(cfg);
  auto g = scenario_grid(s, opt);
  detail::BuiltCase built = detail::build_case(s, g);
  if (cfg.contains("direction")) {
    ScalarField f = detail::synth_harmonics(
        g, detail::parse_harmonics(cfg.at("direction"), "direction term"));
    double q = second_variation_mtx(built.data, f, scenario_weyl(s));
    std::cout << s.id << " Q(f,f) = " << format_double(q) << "\n";
    return kExitPass;
  }
  if (!cfg.contains("basis_limit"))
    throw std::invalid_argument("config: need \"direction\" or \"basis_limit\"");
  const int lb = cfg.at("basis_limit").get<int>();
  MatrixXd Q = hessian_numeric(built.data, tau_from_spec(s, built, g), lb,
                               scenario_weyl(s));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  write_text_file(out_path(opt, s.id + "-hessian-spectrum.csv"),
                  spectrum_csv(es.eigenvalues()));
  std::cout << s.id << " hessian eigenvalues in ["
            << format_double(es.eigenvalues().minCoeff()) << ", "
            << format_double(es.eigenvalues().maxCoeff()) << "], written to "
            << out_path(opt, s.id + "-hessian-spectrum.csv") << "\n";
  return kExitPass;
}

int cmd_compare(const GlobalOptions& opt) {
  json cfg = load_config(
      opt, {"schema_version", "scenario", "tau0", "tau", "trials", "amplitude"});
  Scenario s = load_scenario(cfg);
  auto g = scenario_grid(s, opt);
  detail::BuiltCase built = detail::build_case(s, g);
  ScalarField tau0 = ScalarField::zero(g);
  if (cfg.contains("tau0"))
    tau0 = detail::synth_harmonics(g,
                                   detail::parse_harmonics(cfg.at("tau0"), "tau0 term"));
  std::vector<ScalarField> taus;
  if (cfg.contains("tau"))
    taus.push_back(detail::synth_harmonics(
        g, detail::parse_harmonics(cfg.at("tau"), "tau term")));
  const int trials = cfg.contains("trials") ? cfg.at("trials").get<int>() : 0;
  const double amp = cfg.contains("amplitude") ? cfg.at("amplitude").get<double>() : 0.05;
  std::mt19937_64 rng(opt.seed);
  for (int t = 0; t < trials; ++t) taus.push_back(random_bandlimited(g, 2, amp, rng));
  if (taus.empty())
    throw std::invalid_argument("config: need \"tau\" or a positive \"trials\" count");

  std::string csv = "case,E_tau,E_tau0,E_image,slack\n";
  bool ok = true;
  for (size_t i = 0; i < taus.size(); ++i) {
    ComparisonResult r = comparison_check(built.data, tau0, taus[i], scenario_weyl(s));
    const double slack = r.E_tau - r.E_tau0 - r.E_image;
    ok = ok && slack >= -1e-7;
    csv += std::to_string(i) + "," + format_double(r.E_tau) + "," +
           format_double(r.E_tau0) + "," + format_double(r.E_image) + "," +
           format_double(slack) + "\n";
    std::cout << s.id << "[" << i << "] slack = " << format_double(slack) << "\n";
  }
  write_text_file(out_path(opt, s.id + "-comparison.csv"), csv);
  return ok ? kExitPass : kExitExpectationFailure;
}

int cmd_sweep(const GlobalOptions& opt) {
  json cfg = load_config(opt, {"schema_version", "sweep"});
  const json& sw = cfg.at("sweep");
  detail::require_keys(sw, {"scenario", "parameter", "values", "from", "to", "count"},
                       "sweep config");
  Scenario s = scenario_from_json(sw.at("scenario"));
  if (opt.lmax > 0) s.lmax = opt.lmax;
  std::vector<double> values;
  if (sw.contains("values")) {
    for (const auto& v : sw.at("values")) values.push_back(v.get<double>());
  } else {
    const double a = sw.at("from").get<double>(), b = sw.at("to").get<double>();
    const int n = sw.at("count").get<int>();
    if (n < 2) throw std::invalid_argument("sweep config: count must be >= 2");
    for (int i = 0; i < n; ++i) values.push_back(a + (b - a) * i / (n - 1));
  }
  auto pts = sweep(s, sw.at("parameter").get<std::string>(), values);
  write_text_file(out_path(opt, s.id + "-sweep.csv"), sweep_csv(pts));
  int evaluated = 0;
  for (const auto& p : pts) evaluated += p.result.rejected ? 0 : 1;
  std::cout << s.id << " sweep: " << evaluated << "/" << pts.size()
            << " points evaluated, written to " << out_path(opt, s.id + "-sweep.csv")
            << "\n";
  return kExitPass;
}

int cmd_converge(const GlobalOptions& opt) {
  json cfg = load_config(opt, {"schema_version", "converge"});
  const json& cv = cfg.at("converge");
  detail::require_keys(cv, {"scenario", "lmax_list"}, "converge config");
  Scenario s = scenario_from_json(cv.at("scenario"));
  std::vector<int> Ls;
  for (const auto& L : cv.at("lmax_list")) Ls.push_back(L.get<int>());
  ConvergenceTable t = convergence_study(s, Ls);
  write_text_file(out_path(opt, s.id + "-convergence.csv"), convergence_csv(t));
  for (size_t k = 0; k < t.functionals.size(); ++k)
    std::cout << s.id << " " << t.functionals[k] << " -> "
              << format_double(t.converged[k])
              << " (last delta " << format_double(t.last_delta[k]) << ")\n";
  if (!t.monotone) {
    std::cout << s.id << ": differences are not monotonically decreasing\n";
    return kExitExpectationFailure;
  }
  return kExitPass;
}

int cmd_suite(const GlobalOptions& opt) {
  Suite suite = suite_from_json(load_config(opt, {"schema_version", "suite", "scenarios"}));
  SuiteResult res = run_suite(suite, opt.jobs, opt.lmax);
  write_text_file(out_path(opt, suite.name + "-report.csv"), suite_csv(res));
  write_text_file(out_path(opt, suite.name + "-report.json"),
                  suite_report_json(res).dump(2) + "\n");
  for (const RunResult& r : res.results) {
    std::cout << r.id << ": " << (r.passed ? "pass" : "FAIL") << "\n";
    for (const auto& m : r.messages) std::cout << "  " << m << "\n";
  }
  std::cout << "suite " << suite.name << ": "
            << (res.all_passed ? "all passed" : "FAILURES") << "\n";
  return res.all_passed ? kExitPass : kExitExpectationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-local mass functionals on closed 2-surfaces"};
  app.require_subcommand(1);
  GlobalOptions opt;

  auto* compute = app.add_subcommand("compute", "evaluate functionals for one scenario");
  auto* solve = app.add_subcommand("solve-optimal",
                                   "solve the optimal embedding equation");
  auto* secvar = app.add_subcommand("second-variation",
                                    "quadratic form or numerical Hessian");
  auto* compare = app.add_subcommand("compare", "energy comparison inequality check");
  auto* sweepc = app.add_subcommand("sweep", "evaluate along a 1-parameter family");
  auto* conv = app.add_subcommand("converge", "self-convergence study over lmax");
  auto* suite = app.add_subcommand("suite", "run a regression suite config");
  for (CLI::App* c : {compute, solve, secvar, compare, sweepc, conv, suite})
    add_common_flags(c, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitPass : kExitUsageOrParse;
  }

  try {
    if (compute->parsed()) return cmd_compute(opt);
    if (solve->parsed()) return cmd_solve_optimal(opt);
    if (secvar->parsed()) return cmd_second_variation(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (sweepc->parsed()) return cmd_sweep(opt);
    if (conv->parsed()) return cmd_converge(opt);
    if (suite->parsed()) return cmd_suite(opt);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsageOrParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsageOrParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExpectationFailure;
  }
  return kExitUsageOrParse;
}
