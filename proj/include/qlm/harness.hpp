#pragma once

#include "qlm/serialization.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace qlm {

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

/// Fail-closed key check: configs with unknown keys are rejected so typos
/// cannot silently disable an expectation.
inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + context + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " +
                                  context);
  }
}

}  // namespace detail

struct Expectation {
  std::string name;        // functional or diagnostic being checked
  double value = 0.0;
  double tolerance = 0.0;
  std::string provenance;  // PAPER | TRIVIAL | DERIVED
  std::string comment;     // DERIVED entries must name their oracle here
};

struct HarmonicTerm {
  int l = 0;
  int m = 0;
  double amplitude = 0.0;
};

/// Declarative description of one verification case: a surface family with
/// parameters, a time function, the functionals to evaluate, and the
/// expected values with provenance.
struct Scenario {
  std::string id;
  std::string family;  // sphere | ellipsoid | graph_sphere | boosted_sphere | lightcone
  std::string ambient = "euclidean";  // euclidean | schwarzschild | minkowski
  json parameters = json::object();
  std::vector<std::string> functionals;  // hawking | brown_york | liu_yau | energy
  std::string tau = "zero";              // zero | harmonics | own_time
  std::vector<HarmonicTerm> tau_harmonics;
  int lmax = 24;
  double weyl_tol = 0.0;  // 0 -> library default
  bool expect_reject = false;
  std::vector<Expectation> expectations;
};

struct RunResult {
  std::string id;
  std::vector<std::pair<std::string, double>> values;  // evaluation order
  double residual = 0.0;  // sup |div_sigma j| when the energy is evaluated
  double defect = 0.0;    // worst reference embedding defect
  bool rejected = false;  // construction or evaluation threw
  bool passed = false;
  std::vector<std::string> messages;
  double wall_ms = 0.0;
};

namespace detail {

inline std::vector<HarmonicTerm> parse_harmonics(const json& arr,
                                                 const std::string& context) {
  std::vector<HarmonicTerm> out;
  for (const auto& e : arr) {
    require_keys(e, {"l", "m", "amplitude"}, context);
    out.push_back({e.at("l").get<int>(), e.at("m").get<int>(),
                   e.at("amplitude").get<double>()});
  }
  return out;
}

inline ScalarField synth_harmonics(const GridPtr& g,
                                   const std::vector<HarmonicTerm>& terms,
                                   double base = 0.0) {
  VectorXd c = VectorXd::Zero(g->ncoeff());
  for (const auto& t : terms) c[SphereGrid::index(t.l, t.m)] += t.amplitude;
  return {g, base + g->synth(c).array()};
}

struct BuiltCase {
  SurfaceDataset data;
  ScalarField own_time;
  bool has_own_time = false;
};

inline BuiltCase build_case(const Scenario& s, const GridPtr& g) {
  const json& p = s.parameters;
  auto get = [&](const char* key, double dflt) {
    return p.contains(key) ? p.at(key).get<double>() : dflt;
  };
  auto slice_ambient = [&]() {
    if (s.ambient == "euclidean") return AmbientSpace::euclidean();
    if (s.ambient == "schwarzschild")
      return AmbientSpace::schwarzschild_slice(get("mass", 1.0));
    throw std::invalid_argument("scenario " + s.id + ": ambient \"" + s.ambient +
                                "\" is not a spatial slice");
  };

  if (s.family == "sphere") {
    require_keys(p, {"radius", "mass"}, "sphere parameters");
    const double r = get("radius", 1.0);
    if (s.ambient == "minkowski") {
      SurfaceEmbedding e = SurfaceEmbedding::sphere(g, r, true);
      return {induced_data_spacetime(e), e.time_function(), true};
    }
    return {induced_data_slice(SurfaceEmbedding::sphere(g, r), slice_ambient()),
            ScalarField::zero(g), false};
  }
  if (s.family == "ellipsoid") {
    require_keys(p, {"a", "b", "c", "mass"}, "ellipsoid parameters");
    SurfaceEmbedding e =
        SurfaceEmbedding::ellipsoid(g, get("a", 1.0), get("b", 1.0), get("c", 1.0));
    return {induced_data_slice(e, slice_ambient()), ScalarField::zero(g), false};
  }
  if (s.family == "boosted_sphere") {
    require_keys(p, {"radius", "boost"}, "boosted_sphere parameters");
    SurfaceEmbedding e =
        SurfaceEmbedding::sphere(g, get("radius", 1.0), true).boosted_z(get("boost", 0.0));
    return {induced_data_spacetime(e), e.time_function(), true};
  }
  if (s.family == "graph_sphere") {
    require_keys(p, {"radius", "height"}, "graph_sphere parameters");
    ScalarField h = synth_harmonics(
        g, parse_harmonics(p.at("height"), "graph_sphere height term"));
    SurfaceEmbedding e = SurfaceEmbedding::graph_sphere(g, get("radius", 1.0), h);
    return {induced_data_spacetime(e), e.time_function(), true};
  }
  if (s.family == "lightcone") {
    require_keys(p, {"profile"}, "lightcone parameters");
    ScalarField r = synth_harmonics(
        g, parse_harmonics(p.at("profile"), "lightcone profile term"), 1.0);
    SurfaceEmbedding e = lightcone_surface(r);
    return {induced_data_spacetime(e), e.time_function(), true};
  }
  throw std::invalid_argument("scenario " + s.id + ": unknown family \"" + s.family +
                              "\"");
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  detail::require_keys(j,
                       {"id", "family", "ambient", "parameters", "functionals", "tau",
                        "tau_harmonics", "lmax", "weyl_tol", "expect_reject",
                        "expectations"},
                       "scenario");
  Scenario s;
  s.id = j.at("id").get<std::string>();
  s.family = j.at("family").get<std::string>();
  if (j.contains("ambient")) s.ambient = j.at("ambient").get<std::string>();
  if (j.contains("parameters")) s.parameters = j.at("parameters");
  for (const auto& f : j.at("functionals")) s.functionals.push_back(f.get<std::string>());
  if (j.contains("tau")) s.tau = j.at("tau").get<std::string>();
  if (j.contains("tau_harmonics"))
    s.tau_harmonics = detail::parse_harmonics(j.at("tau_harmonics"), "tau harmonic");
  if (j.contains("lmax")) s.lmax = j.at("lmax").get<int>();
  if (j.contains("weyl_tol")) s.weyl_tol = j.at("weyl_tol").get<double>();
  if (j.contains("expect_reject")) s.expect_reject = j.at("expect_reject").get<bool>();
  if (j.contains("expectations"))
    for (const auto& e : j.at("expectations")) {
      detail::require_keys(e, {"name", "value", "tolerance", "provenance", "comment"},
                           "expectation");
      Expectation x;
      x.name = e.at("name").get<std::string>();
      x.value = e.at("value").get<double>();
      x.tolerance = e.at("tolerance").get<double>();
      x.provenance = e.at("provenance").get<std::string>();
      if (e.contains("comment")) x.comment = e.at("comment").get<std::string>();
      if (x.provenance != "PAPER" && x.provenance != "TRIVIAL" &&
          x.provenance != "DERIVED")
        throw std::invalid_argument("scenario " + s.id + ": expectation \"" + x.name +
                                    "\" has invalid provenance \"" + x.provenance +
                                    "\"");
      if (x.provenance == "DERIVED" && x.comment.empty())
        throw std::invalid_argument("scenario " + s.id + ": DERIVED expectation \"" +
                                    x.name + "\" must name its oracle in the comment");
      s.expectations.push_back(std::move(x));
    }
  return s;
}

/// Runs one scenario on its own grid (grids are not shared across workers,
/// which keeps their lazily built derivative tables thread-local).
inline RunResult run_scenario(const Scenario& s, int lmax_override = 0) {
  RunResult out;
  out.id = s.id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto g = SphereGrid::make(lmax_override > 0 ? lmax_override : s.lmax);
    detail::BuiltCase built = detail::build_case(s, g);
    WeylOptions wopt = energy_options();
    if (s.weyl_tol > 0.0) wopt.tol = s.weyl_tol;

    ScalarField tau = ScalarField::zero(g);
    if (s.tau == "harmonics") {
      tau = detail::synth_harmonics(g, s.tau_harmonics);
    } else if (s.tau == "own_time") {
      if (!built.has_own_time)
        throw std::invalid_argument("scenario " + s.id +
                                    ": family has no intrinsic time function");
      tau = built.own_time;
    } else if (s.tau != "zero") {
      throw std::invalid_argument("scenario " + s.id + ": unknown tau spec \"" + s.tau +
                                  "\"");
    }

    for (const std::string& f : s.functionals) {
      if (f == "hawking") {
        out.values.emplace_back(f, hawking_mass(built.data));
      } else if (f == "brown_york") {
        out.values.emplace_back(f, brown_york_mass(built.data, wopt));
      } else if (f == "liu_yau") {
        out.values.emplace_back(f, liu_yau_mass(built.data, wopt));
      } else if (f == "energy") {
        EnergyReport rep = wang_yau_energy(built.data, tau, wopt);
        out.values.emplace_back(f, rep.value);
        out.values.emplace_back("energy_canonical", rep.canonical);
        out.residual = rep.div_j.v.abs().maxCoeff();
        out.defect = std::max(out.defect, rep.reference_defect);
      } else {
        throw std::invalid_argument("scenario " + s.id + ": unknown functional \"" + f +
                                    "\"");
      }
    }
  } catch (const std::invalid_argument&) {
    throw;  // config errors are never downgraded to scenario failures
  } catch (const std::exception& e) {
    out.rejected = true;
    out.messages.push_back(e.what());
  }

  if (s.expect_reject) {
    out.passed = out.rejected;
    if (!out.rejected) out.messages.push_back("expected rejection but evaluation succeeded");
  } else if (out.rejected) {
    out.passed = false;
  } else {
    out.passed = true;
    for (const Expectation& x : s.expectations) {
      double got = std::numeric_limits<double>::quiet_NaN();
      bool found = false;
      for (const auto& [name, v] : out.values)
        if (name == x.name) {
          got = v;
          found = true;
          break;
        }
      if (!found) {
        out.passed = false;
        out.messages.push_back("expectation \"" + x.name + "\": value not computed");
        continue;
      }
      if (!(std::abs(got - x.value) <= x.tolerance)) {
        out.passed = false;
        out.messages.push_back("expectation \"" + x.name + "\" failed: got " +
                               format_double(got) + ", want " + format_double(x.value) +
                               " +/- " + format_double(x.tolerance));
      }
    }
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

struct Suite {
  std::string name;
  std::vector<Scenario> scenarios;
};

inline Suite suite_from_json(const json& j) {
  detail::require_keys(j, {"schema_version", "suite", "scenarios"}, "suite config");
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kConfigSchemaVersion)
    throw std::invalid_argument("config: missing or unsupported schema_version (expect " +
                                std::to_string(kConfigSchemaVersion) + ")");
  Suite suite;
  suite.name = j.contains("suite") ? j.at("suite").get<std::string>() : "suite";
  std::vector<std::string> seen;
  for (const auto& sj : j.at("scenarios")) {
    Scenario s = scenario_from_json(sj);
    for (const auto& id : seen)
      if (id == s.id)
        throw std::invalid_argument("config: duplicate scenario id \"" + s.id + "\"");
    seen.push_back(s.id);
    suite.scenarios.push_back(std::move(s));
  }
  return suite;
}

struct SuiteResult {
  std::string name;
  std::vector<RunResult> results;  // config order
  bool all_passed = true;
};

/// Executes all scenarios with a worker pool; one scenario's failure is
/// recorded in its RunResult and never aborts the others.
inline SuiteResult run_suite(const Suite& suite, int jobs = 1, int lmax_override = 0) {
  SuiteResult out;
  out.name = suite.name;
  out.results.resize(suite.scenarios.size());
  jobs = std::max(1, jobs);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < suite.scenarios.size();
         i = next.fetch_add(1))
      out.results[i] = run_scenario(suite.scenarios[i], lmax_override);
  };
  if (jobs == 1 || suite.scenarios.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const RunResult& r : out.results) out.all_passed = out.all_passed && r.passed;
  return out;
}

inline std::string suite_csv(const SuiteResult& res) {
  std::string out = "scenario,functional,value,residual_sup,defect,pass\n";
  for (const RunResult& r : res.results) {
    if (r.values.empty())
      out += r.id + ",," + "," + format_double(r.residual) + "," +
             format_double(r.defect) + "," + (r.passed ? "1" : "0") + "\n";
    for (const auto& [name, v] : r.values)
      out += r.id + "," + name + "," + format_double(v) + "," +
             format_double(r.residual) + "," + format_double(r.defect) + "," +
             (r.passed ? "1" : "0") + "\n";
  }
  return out;
}

inline json suite_report_json(const SuiteResult& res) {
  json scenarios = json::array();
  for (const RunResult& r : res.results) {
    json values = json::object();
    for (const auto& [name, v] : r.values) values[name] = v;
    scenarios.push_back({{"id", r.id},
                         {"values", values},
                         {"residual_sup", r.residual},
                         {"reference_defect", r.defect},
                         {"rejected", r.rejected},
                         {"passed", r.passed},
                         {"messages", r.messages},
                         {"wall_ms", r.wall_ms}});
  }
  return {{"suite", res.name},
          {"all_passed", res.all_passed},
          {"scenarios", scenarios}};
}

struct ConvergenceTable {
  std::vector<int> lmax_values;
  std::vector<std::string> functionals;
  // rows[i][k]: functional k at lmax_values[i]
  std::vector<std::vector<double>> rows;
  std::vector<double> converged;   // value at the largest lmax
  std::vector<double> last_delta;  // |change| over the final refinement
  bool monotone = true;            // deltas non-increasing for every functional
};

/// Evaluates one scenario over a list of resolutions and reports the
/// successive differences as a self-convergence diagnostic.
inline ConvergenceTable convergence_study(const Scenario& s,
                                          const std::vector<int>& lmax_list) {
  ConvergenceTable t;
  t.lmax_values = lmax_list;
  for (int L : lmax_list) {
    RunResult r = run_scenario(s, L);
    if (r.rejected)
      throw std::runtime_error("convergence_study: scenario failed at lmax " +
                               std::to_string(L) + ": " +
                               (r.messages.empty() ? "unknown" : r.messages.front()));
    if (t.functionals.empty())
      for (const auto& [name, v] : r.values) t.functionals.push_back(name);
    std::vector<double> row;
    for (const auto& [name, v] : r.values) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  const size_t n = t.rows.size(), k = t.functionals.size();
  t.converged.assign(k, 0.0);
  t.last_delta.assign(k, 0.0);
  for (size_t j = 0; j < k; ++j) {
    t.converged[j] = t.rows[n - 1][j];
    double prev_delta = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < n; ++i) {
      double d = std::abs(t.rows[i][j] - t.rows[i - 1][j]);
      // deltas at the rounding floor are noise, not a convergence failure
      if (d > prev_delta + 1e-14 && d > 1e-12) t.monotone = false;
      prev_delta = d;
      if (i == n - 1) t.last_delta[j] = d;
    }
  }
  return t;
}

inline std::string convergence_csv(const ConvergenceTable& t) {
  std::string out = "lmax";
  for (const auto& f : t.functionals) out += "," + f;
  out += "\n";
  for (size_t i = 0; i < t.rows.size(); ++i) {
    out += std::to_string(t.lmax_values[i]);
    for (double v : t.rows[i]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

struct SweepPoint {
  double parameter = 0.0;
  RunResult result;
};

/// Evaluates a scenario template along a 1-parameter family; the parameter
/// is a JSON pointer into the scenario's parameter object. Per-point
/// failures are recorded and the sweep continues.
inline std::vector<SweepPoint> sweep(const Scenario& base, const std::string& pointer,
                                     const std::vector<double>& values) {
  std::vector<SweepPoint> out;
  for (double v : values) {
    Scenario s = base;
    s.parameters[json::json_pointer(pointer)] = v;
    s.id = base.id + "@" + format_double(v);
    out.push_back({v, run_scenario(s)});
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "parameter,functional,value,status\n";
  for (const SweepPoint& p : points) {
    if (p.result.rejected) {
      out += format_double(p.parameter) + ",,," +
             (p.result.messages.empty() ? "rejected" : p.result.messages.front()) + "\n";
      continue;
    }
    for (const auto& [name, v] : p.result.values)
      out += format_double(p.parameter) + "," + name + "," + format_double(v) + ",ok\n";
  }
  return out;
}

}  // namespace qlm
