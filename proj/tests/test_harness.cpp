#include "qlm/harness.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace qlm;

namespace {

json schwarzschild_scenario_json() {
  return {
      {"id", "schw-r4"},
      {"family", "sphere"},
      {"ambient", "schwarzschild"},
      {"parameters", {{"radius", 4.0}, {"mass", 1.0}}},
      {"functionals", {"hawking", "brown_york", "liu_yau"}},
      {"lmax", 12},
      {"expectations",
       json::array(
           {{{"name", "hawking"},
             {"value", 1.0},
             {"tolerance", 1e-8},
             {"provenance", "DERIVED"},
             {"comment", "coordinate spheres carry the full mass"}},
            {{"name", "brown_york"},
             {"value", 4.0 * (1.0 - std::sqrt(0.5))},
             {"tolerance", 1e-7},
             {"provenance", "DERIVED"},
             {"comment", "closed form r(1 - sqrt(1 - 2m/r))"}}})}};
}

}  // namespace

TEST_CASE("scalar field JSON round trip is bit-stable") {
  auto g = SphereGrid::make(12);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  VectorXd c(g->ncoeff());
  for (int i = 0; i < c.size(); ++i) c[i] = N(rng);
  ScalarField f{g, g->synth(c)};
  // through a serialized string, as a file round trip would go: the text
  // representation must preserve every coefficient bit
  json j1 = field_to_json(f);
  json j2 = json::parse(j1.dump());
  REQUIRE(j1 == j2);
  VectorXd ca = coefficients_from_json(j1, g);
  VectorXd cb = coefficients_from_json(j2, g);
  for (int i = 0; i < ca.size(); ++i) REQUIRE(ca[i] == cb[i]);
  // reconstruction from identical coefficients is deterministic
  ScalarField b1 = field_from_json(j1, g), b2 = field_from_json(j2, g);
  REQUIRE((b1.v - b2.v).abs().maxCoeff() == 0.0);
}

TEST_CASE("embedding and report serialization round trips") {
  auto g = SphereGrid::make(12);
  SurfaceEmbedding e = SurfaceEmbedding::ellipsoid(g, 1.0, 1.1, 1.2);
  SurfaceEmbedding back = embedding_from_json(json::parse(embedding_to_json(e).dump()), g);
  for (int k = 0; k < 3; ++k)
    REQUIRE((e.coeffs[k] - back.coeffs[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("auxiliary CSV and dataset exports") {
  auto g = SphereGrid::make(12);
  WeylResult res = WeylSolver(g).solve(MetricField::round(g, 1.3));
  std::string log = weyl_history_csv(res);
  REQUIRE(log.rfind("iteration,defect\n", 0) == 0);
  REQUIRE(std::count(log.begin(), log.end(), '\n') == long(res.history.size()) + 1);
  SurfaceDataset d = induced_data_slice(SurfaceEmbedding::sphere(g, 2.0),
                                        AmbientSpace::euclidean());
  json j = dataset_to_json(d);
  REQUIRE(j.contains("meanH"));
  ScalarField h = field_from_json(j.at("normH"), g);
  REQUIRE((h.v - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("config parsing is fail-closed") {
  json base = {{"schema_version", 1},
               {"suite", "demo"},
               {"scenarios", json::array({schwarzschild_scenario_json()})}};
  REQUIRE_NOTHROW(suite_from_json(base));
  SECTION("unknown top-level key") {
    json bad = base;
    bad["scenarois"] = json::array();
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("unknown scenario key") {
    json bad = base;
    bad["scenarios"][0]["lmaxx"] = 16;
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("wrong schema version") {
    json bad = base;
    bad["schema_version"] = 99;
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("invalid provenance tag") {
    json bad = base;
    bad["scenarios"][0]["expectations"][0]["provenance"] = "GUESS";
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("DERIVED without named oracle") {
    json bad = base;
    bad["scenarios"][0]["expectations"][0]["comment"] = "";
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("duplicate scenario id") {
    json bad = base;
    bad["scenarios"].push_back(schwarzschild_scenario_json());
    REQUIRE_THROWS_AS(suite_from_json(bad), std::invalid_argument);
  }
  SECTION("malformed JSON text") {
    REQUIRE_THROWS_AS(json::parse("{\"schema_version\": 1,"), json::parse_error);
  }
}

TEST_CASE("scenario expectations gate the result") {
  Scenario s = scenario_from_json(schwarzschild_scenario_json());
  RunResult r = run_scenario(s);
  REQUIRE(r.passed);
  REQUIRE(r.values.size() == 3);
  SECTION("a wrong expectation fails the scenario with a message") {
    s.expectations[0].value = 2.0;
    RunResult bad = run_scenario(s);
    REQUIRE_FALSE(bad.passed);
    REQUIRE_FALSE(bad.messages.empty());
  }
  SECTION("expect-reject scenarios pass only on rejection") {
    Scenario rej;
    rej.id = "cone-too-steep";
    rej.family = "lightcone";
    rej.ambient = "minkowski";
    rej.parameters = {{"profile", json::array({{{"l", 2}, {"m", 0}, {"amplitude", 0.6}}})}};
    rej.functionals = {"liu_yau"};
    rej.lmax = 12;
    rej.expect_reject = true;  // mean curvature vector fails to be spacelike
    RunResult rr = run_scenario(rej);
    REQUIRE(rr.passed);
    REQUIRE(rr.rejected);
  }
}

TEST_CASE("suite runs are deterministic and isolated") {
  json cfg = {{"schema_version", 1},
              {"suite", "demo"},
              {"scenarios", json::array({schwarzschild_scenario_json()})}};
  json round = {{"id", "round"},
                {"family", "sphere"},
                {"ambient", "euclidean"},
                {"parameters", {{"radius", 2.0}}},
                {"functionals", {"hawking", "brown_york"}},
                {"lmax", 12}};
  cfg["scenarios"].push_back(round);
  Suite suite = suite_from_json(cfg);
  SuiteResult a = run_suite(suite);
  SuiteResult b = run_suite(suite, 2);
  REQUIRE(a.all_passed);
  REQUIRE(suite_csv(a) == suite_csv(b));
  SECTION("one failing scenario leaves the others' values unchanged") {
    json broken = schwarzschild_scenario_json();
    broken["id"] = "broken";
    broken["parameters"] = {{"radius", 1.5}, {"mass", 1.0}};  // inside the horizon
    json cfg2 = cfg;
    cfg2["scenarios"].insert(cfg2["scenarios"].begin(), broken);
    SuiteResult c = run_suite(suite_from_json(cfg2));
    REQUIRE_FALSE(c.all_passed);
    REQUIRE_FALSE(c.results[0].passed);
    for (size_t i = 0; i < a.results.size(); ++i) {
      REQUIRE(c.results[i + 1].passed);
      for (size_t k = 0; k < a.results[i].values.size(); ++k)
        REQUIRE(c.results[i + 1].values[k].second == a.results[i].values[k].second);
    }
  }
}

TEST_CASE("convergence study reports shrinking differences") {
  Scenario s = scenario_from_json(schwarzschild_scenario_json());
  s.expectations.clear();
  ConvergenceTable t = convergence_study(s, {8, 12, 16});
  REQUIRE(t.rows.size() == 3);
  REQUIRE(t.monotone);
  for (double d : t.last_delta) REQUIRE(d < 1e-8);
  std::string csv = convergence_csv(t);
  REQUIRE(csv.rfind("lmax,hawking,brown_york,liu_yau\n", 0) == 0);
}

TEST_CASE("parameter sweeps") {
  SECTION("Brown-York over the Schwarzschild radius decreases toward the mass") {
    Scenario s = scenario_from_json(schwarzschild_scenario_json());
    s.expectations.clear();
    s.functionals = {"brown_york"};
    auto pts = sweep(s, "/radius", {8.0, 16.0, 32.0});
    REQUIRE(pts.size() == 3);
    double prev = 2.0;
    for (const auto& p : pts) {
      REQUIRE_FALSE(p.result.rejected);
      double v = p.result.values[0].second;
      REQUIRE(v < prev);
      REQUIRE(v > 1.0);
      prev = v;
    }
  }
  SECTION("per-point failures are recorded without aborting the sweep") {
    Scenario s;
    s.id = "cone";
    s.family = "lightcone";
    s.ambient = "minkowski";
    s.parameters = {{"profile", json::array({{{"l", 2}, {"m", 0}, {"amplitude", 0.1}}})}};
    s.functionals = {"hawking"};
    s.lmax = 12;
    auto pts = sweep(s, "/profile/0/amplitude", {0.1, 0.7, 0.2});
    REQUIRE_FALSE(pts[0].result.rejected);
    REQUIRE(pts[1].result.rejected);  // H not spacelike at amplitude 0.7
    REQUIRE_FALSE(pts[2].result.rejected);
    std::string csv = sweep_csv(pts);
    REQUIRE(csv.find("0.2,hawking") != std::string::npos);
  }
}
