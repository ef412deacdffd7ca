#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fixtures.hpp"
#include "vigrid/batch.hpp"
#include "vigrid/csv.hpp"
#include "vigrid/errors.hpp"
#include "vigrid/scenario.hpp"

using namespace vigrid;
using nlohmann::json;

namespace {

json minimal_scenario() {
  return json::parse(R"({
    "schema_version": "1",
    "buses": [
      {"id": "1", "M0": 1.0, "pL": 0.0,
       "supply": {"kind": "first_order", "tau": 0.5, "droop": 9.0, "damping": 1.0}},
      {"id": "2", "M0": 1.0, "pL": 0.0,
       "supply": {"kind": "first_order", "tau": 0.5, "droop": 9.0, "damping": 1.0}}
    ],
    "lines": [{"from": "1", "to": "2", "susceptance": 1.0}],
    "sim": {"step": 0.01, "horizon": 5.0, "model": "nonlinear"},
    "disturbances": [{"bus": "1", "delta_pL": 0.2, "time": 1.0}],
    "seed": 42
  })");
}

std::string temp_path(const char* name) {
  return std::string("/tmp/vigrid_test_") + name;
}

}  // namespace

TEST_CASE("minimal scenario loads") {
  auto sc = Scenario::from_json(minimal_scenario());
  CHECK(sc.graph().bus_count() == 2);
  CHECK(sc.graph().line_count() == 1);
  CHECK(sc.supplies().size() == 2);
  CHECK(sc.sim_config().horizon == 5.0);
  CHECK(sc.seed() == 42);
  CHECK(sc.final_loads()(0) == doctest::Approx(0.2));
}

TEST_CASE("dangling bus reference is named in the error") {
  json j = minimal_scenario();
  j["policy"] = {{"kind", "bang_bang"}, {"buses", {"99"}}, {"Ma", 1.0}};
  CHECK_THROWS_WITH_AS(Scenario::from_json(j), doctest::Contains("99"),
                       ValidationError);
}

TEST_CASE("schema violations carry a pointer path") {
  json j = minimal_scenario();
  j.erase("schema_version");
  CHECK_THROWS_WITH_AS(Scenario::from_json(j), doctest::Contains("/schema_version"),
                       ValidationError);

  j = minimal_scenario();
  j["buses"][0].erase("M0");
  CHECK_THROWS_WITH_AS(Scenario::from_json(j), doctest::Contains("/buses/0"),
                       ValidationError);

  j = minimal_scenario();
  j["sim"].erase("horizon");
  CHECK_THROWS_AS(Scenario::from_json(j), ValidationError);
}

TEST_CASE("parse errors report line and column") {
  const std::string path = temp_path("broken.json");
  {
    std::ofstream out(path);
    out << "{\n  \"schema_version\": \"1\",\n  broken\n}\n";
  }
  CHECK_THROWS_WITH_AS(Scenario::load(path), doctest::Contains("line 3"),
                       ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("malformed scenarios fail before any simulation starts") {
  // a corpus of files each violating one schema rule
  std::vector<json> bad;
  bad.push_back(minimal_scenario());
  bad.back()["schema_version"] = "2";
  bad.push_back(minimal_scenario());
  bad.back()["lines"][0]["susceptance"] = -1.0;
  bad.push_back(minimal_scenario());
  bad.back()["buses"][0]["M0"] = 0.0;
  bad.push_back(minimal_scenario());
  bad.back()["sim"]["step"] = -0.01;
  bad.push_back(minimal_scenario());
  bad.back()["buses"][0]["supply"] = {{"kind", "warp-drive"}};
  bad.push_back(minimal_scenario());
  bad.back()["disturbances"][0]["bus"] = "42";
  for (const auto& j : bad) CHECK_THROWS_AS(Scenario::from_json(j), ValidationError);
}

TEST_CASE("round-trip through the canonical serializer is byte-identical") {
  auto sc = Scenario::from_json(minimal_scenario());
  const std::string p1 = temp_path("rt1.json"), p2 = temp_path("rt2.json");
  sc.save(p1);
  auto sc2 = Scenario::load(p1);
  sc2.save(p2);
  std::ifstream f1(p1), f2(p2);
  std::string s1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("state-space supply declarations load") {
  json j = minimal_scenario();
  j["buses"][0]["supply"] = {{"kind", "state_space"},
                             {"A", {{-1.0, 0.0}, {0.0, -2.0}}},
                             {"B", {1.0, 1.0}},
                             {"C", {1.0, 0.5}},
                             {"D", 0.3}};
  auto sc = Scenario::from_json(j);
  CHECK(sc.supplies()[0].order() == 2);
  CHECK(sc.supplies()[0].D() == doctest::Approx(0.3));
}

TEST_CASE("declared bus damping folds into the supply feedthrough") {
  json j = minimal_scenario();
  j["buses"][0]["Dv"] = 0.7;
  auto sc = Scenario::from_json(j);
  CHECK(sc.supplies()[0].D() == doctest::Approx(1.0 + 0.7));
}

TEST_CASE("rate-limited policy resolves rho from certificates") {
  json j = minimal_scenario();
  j["policy"] = {{"kind", "rate_limited"},
                 {"buses", {"1", "2"}},
                 {"Ma", 1.0}};
  auto sc = Scenario::from_json(j);
  auto policy = sc.make_policy();
  REQUIRE(policy);
  // first-order supplies: rho = damping = 1.0, cap 2 rho - eps
  CHECK(policy->declared_rate_bound(0) == doctest::Approx(2.0 - 1e-4));
}

TEST_CASE("batch of one run equals the single trajectory envelope") {
  json j = minimal_scenario();
  auto sc = Scenario::from_json(j);
  BatchSpec spec;
  spec.runs = 1;
  spec.workers = 1;
  BatchReport rep = run_batch(sc, spec);
  Simulator sim(sc.graph(), sc.supplies());
  Trajectory t = sim.integrate(sim.rest_state(), sc.sim_config(), nullptr);
  REQUIRE(rep.times.size() == t.samples());
  for (std::size_t i = 0; i < t.samples(); ++i) {
    CHECK(rep.omega_max[i] ==
          t.omega.row(static_cast<Eigen::Index>(i)).maxCoeff());
    CHECK(rep.omega_min[i] ==
          t.omega.row(static_cast<Eigen::Index>(i)).minCoeff());
  }
}

TEST_CASE("trajectory CSV has one row per grid sample plus a header") {
  json j = minimal_scenario();
  j["sim"]["horizon"] = 30.0;
  auto sc = Scenario::from_json(j);
  Simulator sim(sc.graph(), sc.supplies());
  Trajectory t = sim.integrate(sim.rest_state(), sc.sim_config(), nullptr);
  const std::string path = temp_path("traj.csv");
  write_trajectory_csv(path, sc.graph(), t);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,omega_1,omega_2,eta_1_2,Mv_1,Mv_2");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3001);
  std::remove(path.c_str());
}

TEST_CASE("envelope and lyapunov CSVs carry the declared columns") {
  json j = minimal_scenario();
  j["sim"]["horizon"] = 2.0;
  auto sc = Scenario::from_json(j);
  BatchSpec spec;
  spec.runs = 2;
  BatchReport rep = run_batch(sc, spec);
  const std::string path = temp_path("env.csv");
  write_envelope_csv(path, rep);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,omega_max,omega_min");
  std::remove(path.c_str());

  Simulator sim(sc.graph(), sc.supplies());
  Trajectory t = sim.integrate(sim.rest_state(), sc.sim_config(), nullptr);
  auto eq = sc.target_equilibrium();
  auto lrep = check_dissipation(sc.graph(), sc.supplies(), eq, t,
                                sc.margined_strictness(), sc.storage_set(),
                                sc.sim_config().model);
  const std::string lpath = temp_path("lyap.csv");
  write_lyapunov_csv(lpath, lrep);
  std::ifstream lin(lpath);
  bool found_header = false;
  while (std::getline(lin, line)) {
    if (line == "t,V,V_F,V_P,sumVj,bound") {
      found_header = true;
      break;
    }
  }
  CHECK(found_header);
  std::remove(lpath.c_str());
}

TEST_CASE("batch reports are identical across worker counts") {
  json j = minimal_scenario();
  j["policy"] = {{"kind", "randomized"}, {"buses", {"1", "2"}}, {"Ma", 1.0}};
  j["sim"]["horizon"] = 3.0;
  auto sc = Scenario::from_json(j);
  BatchSpec a;
  a.runs = 12;
  a.base_seed = 5;
  a.workers = 1;
  BatchSpec b = a;
  b.workers = 4;
  BatchReport ra = run_batch(sc, a);
  BatchReport rb = run_batch(sc, b);
  REQUIRE(ra.times.size() == rb.times.size());
  for (std::size_t i = 0; i < ra.times.size(); ++i) {
    CHECK(ra.omega_max[i] == rb.omega_max[i]);
    CHECK(ra.omega_min[i] == rb.omega_min[i]);
  }
  CHECK(ra.classes == rb.classes);
}
