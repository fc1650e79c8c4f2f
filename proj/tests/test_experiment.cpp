// Copyright 2026 The quenchphase Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "quenchphase/experiment.hpp"

using namespace qp;
using nlohmann::json;

namespace {

json chain_config(int n, double h_post, double t_max = 5.0, double dt = 0.05) {
  return {{"backend", "free_fermion"},
          {"chain", {{"n", n}, {"gamma_x", 0.8}, {"gamma_y", 0.2}, {"h", 0.8}}},
          {"quench", {{"h", h_post}}},
          {"grid", {{"t_max", t_max}, {"dt", dt}}}};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::string quench_csv(const ExperimentConfig& c) {
  std::ostringstream os;
  write_quench_table(os, run_quench(c), TableFormat::Csv);
  return os.str();
}

}  // namespace

TEST_CASE("config defaults are filled in") {
  json j = chain_config(10, 1.1);
  j.erase("grid");
  const auto c = parse_config(j);
  CHECK(c.resolved_site() == 5);
  CHECK(c.grid.dt == 0.01);
  CHECK(c.grid.t_max == 50.0);
  CHECK(c.quench.relative_phase == 0.0);
  CHECK(c.quench.post.h == 1.1);
  CHECK(c.quench.post.gamma_x == 0.8);
  CHECK(c.quench.pre.h == 0.8);
  CHECK(c.output.format == TableFormat::Csv);
}

TEST_CASE("config round-trips through its resolved form") {
  const auto c = parse_config(chain_config(12, 1.3));
  json j = to_json(c);
  const auto d = parse_config(j);
  CHECK(to_json(d) == j);
}

TEST_CASE("config errors") {
  json j = chain_config(10, 1.1);
  j["colour"] = "red";
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["chain"]["n"] = "ten";
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ParseError);

  j = chain_config(10, 1.1);
  j.erase("chain");
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["quench"]["n"] = 12;
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["lindblad"] = {{"initial", {0, 0, 1}}};
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(20, 1.1);
  j["backend"] = "ed";
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["grid"]["dt"] = 0.0;
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["site"] = 10;
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  j = chain_config(10, 1.1);
  j["backend"] = "qmc";
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  json l{{"backend", "lindblad"}, {"lindblad", {{"h_z", 0.5}}}};
  CHECK(code_of([&] { parse_config(l); }) == ErrorCode::ConfigError);
  l["lindblad"]["initial"] = {1.0, 0.0, 0.5};
  CHECK(code_of([&] { parse_config(l); }) == ErrorCode::ConfigError);
  l["lindblad"]["initial"] = {0.6, 0.0, 0.8};
  CHECK_NOTHROW(parse_config(l));
  l["lindblad"]["lambda_x"] = -0.1;
  CHECK(code_of([&] { parse_config(l); }) == ErrorCode::ConfigError);

  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::IoError);
}

TEST_CASE("backend names") {
  CHECK(backend_from_string("ff") == Backend::FreeFermion);
  CHECK(backend_from_string("freefermion") == Backend::FreeFermion);
  CHECK(backend_from_string("ed") == Backend::ED);
  CHECK(backend_from_string(to_string(Backend::Lindblad)) == Backend::Lindblad);
}

TEST_CASE("lindblad backend with all parameters zero gives constant columns") {
  const auto c = parse_config({{"backend", "lindblad"},
                               {"lindblad", {{"initial", {0.3, -0.4, 0.5}}}},
                               {"grid", {{"t_max", 2.0}, {"dt", 0.1}}}});
  const auto r = run_quench(c);
  REQUIRE(r.trajectory.size() == 21);
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory.states[i].rho_x == 0.3);
    CHECK(r.trajectory.states[i].rho_y == -0.4);
    CHECK(r.trajectory.states[i].rho_z == 0.5);
    CHECK(r.angles.phi[i] == r.angles.phi[0]);
    CHECK(r.phases.phi_total[i] == 0.0);
    CHECK(r.phases.phi_dynamic[i] == 0.0);
  }
}

TEST_CASE("quench table round-trips at full precision") {
  const auto c = parse_config(chain_config(10, 1.1, 3.0));
  const auto r = run_quench(c);
  std::ostringstream os;
  write_quench_table(os, r, TableFormat::Csv);
  CHECK(os.str().substr(0, os.str().find('\n')) ==
        "t,rho_x,rho_y,rho_z,r,theta,phi,phi_total,phi_dynamic,phi_geometric");
  std::istringstream is(os.str());
  const auto back = read_trajectory_csv(is);
  REQUIRE(back.size() == r.trajectory.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.times[i] == r.trajectory.times[i]);
    CHECK(back.states[i].rho_x == r.trajectory.states[i].rho_x);
    CHECK(back.states[i].rho_y == r.trajectory.states[i].rho_y);
    CHECK(back.states[i].rho_z == r.trajectory.states[i].rho_z);
  }

  std::ostringstream js;
  write_quench_table(js, r, TableFormat::Json);
  const auto parsed = json::parse(js.str());
  CHECK(parsed.at("samples").size() == r.trajectory.size());
  CHECK(parsed.at("samples")[7].at("rho_z").get<double>() == r.trajectory.states[7].rho_z);
}

TEST_CASE("quench output is deterministic") {
  const auto c = parse_config(chain_config(16, 1.1, 4.0));
  CHECK(quench_csv(c) == quench_csv(c));
}

TEST_CASE("trajectory reader") {
  std::istringstream ok("# comment\nrho_z, t,extra,rho_x,rho_y\n0.5,0,x,0.1,0.2\n0.4,0.1,y,0.1,0.2\n");
  const auto t = read_trajectory_csv(ok);
  REQUIRE(t.size() == 2);
  CHECK(t.times[1] == 0.1);
  CHECK(t.states[0].rho_z == 0.5);

  std::istringstream missing("t,rho_x,rho_y\n0,0,0\n");
  CHECK(code_of([&] { read_trajectory_csv(missing); }) == ErrorCode::ParseError);
  std::istringstream bad("t,rho_x,rho_y,rho_z\n0,0,zero,0\n");
  CHECK(code_of([&] { read_trajectory_csv(bad); }) == ErrorCode::ParseError);
  std::istringstream ragged("t,rho_x,rho_y,rho_z\n0,0,0\n");
  CHECK(code_of([&] { read_trajectory_csv(ragged); }) == ErrorCode::ParseError);
  std::istringstream backwards("t,rho_x,rho_y,rho_z\n1,0,0,0\n0,0,0,0\n");
  CHECK(code_of([&] { read_trajectory_csv(backwards); }) == ErrorCode::ParseError);
  CHECK(code_of([] { read_trajectory_csv(std::string("/nonexistent.csv")); }) == ErrorCode::IoError);
}

TEST_CASE("fit preconditions") {
  BlochTrajectory ten;
  for (int i = 0; i < 10; ++i) {
    ten.times.push_back(0.1 * i);
    ten.states.push_back({std::exp(-0.1 * i), 0.0, 0.0});
  }
  CHECK(code_of([&] { run_fit(ten); }) == ErrorCode::InsufficientDecay);
  CHECK(exit_code_for(ErrorCode::InsufficientDecay) == 4);

  BlochTrajectory uneven;
  for (int i = 0; i < 100; ++i) {
    uneven.times.push_back(0.1 * i + (i > 50 ? 0.05 : 0.0));
    uneven.states.push_back({std::exp(-0.1 * i), 0.0, 0.0});
  }
  CHECK(code_of([&] { run_fit(uneven); }) == ErrorCode::ParseError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::ConfigError) == 2);
  CHECK(exit_code_for(ErrorCode::ParseError) == 2);
  CHECK(exit_code_for(ErrorCode::IoError) == 2);
  CHECK(exit_code_for(ErrorCode::GridMismatch) == 2);
  CHECK(exit_code_for(ErrorCode::WindowTooShort) == 4);
  CHECK(exit_code_for(ErrorCode::FitDiverged) == 3);
  CHECK(exit_code_for(ErrorCode::AmbiguousBranch) == 3);
  CHECK(exit_code_for(ErrorCode::PurityVanished) == 3);
}

TEST_CASE("compare") {
  const auto c = parse_config(chain_config(8, 1.1, 10.0, 0.01));
  const auto same = run_compare(c, c);
  CHECK(same.max_abs_dphi == 0.0);
  CHECK_FALSE(same.onset);

  auto ed = c;
  ed.backend = Backend::ED;
  const auto r = run_compare(ed, c, 1e-8);
  CHECK(r.max_abs_dphi < 1e-8);
  CHECK_FALSE(r.onset);
  CHECK(r.times.size() == 1001);

  auto shorter = c;
  shorter.grid.t_max = 5.0;
  CHECK(code_of([&] { run_compare(c, shorter); }) == ErrorCode::GridMismatch);
  auto coarser = c;
  coarser.grid.dt = 0.02;
  coarser.grid.t_max = 20.0;
  CHECK(code_of([&] { run_compare(c, coarser); }) == ErrorCode::GridMismatch);
}

TEST_CASE("compare onset is the first crossing") {
  BlochTrajectory a, b;
  for (int i = 0; i < 20; ++i) {
    const double t = 0.5 * i;
    a.times.push_back(t);
    b.times.push_back(t);
    a.states.push_back({std::cos(0.1 * t), std::sin(0.1 * t), 0.0});
    const double d = t < 4.0 ? 0.0 : 0.01;
    b.states.push_back({std::cos(0.1 * t + d), std::sin(0.1 * t + d), 0.0});
  }
  const auto r = compare_trajectories(a, b, 1e-3);
  REQUIRE(r.onset);
  CHECK(*r.onset == 4.0);
  CHECK(r.max_abs_dphi == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("sweep") {
  const auto c = parse_config(chain_config(8, 1.1, 2.0));
  CHECK(code_of([] { parse_sweep({{"parameter", "h"}, {"values", {1.0}}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_sweep({{"parameter", "n"}, {"values", {1.0, 2.0}}}); }) == ErrorCode::ConfigError);
  const auto lin = parse_sweep({{"parameter", "delta"}, {"start", 0.0}, {"stop", 0.3}, {"count", 4}});
  REQUIRE(lin.values.size() == 4);
  CHECK(lin.values[3] == doctest::Approx(0.3));
  CHECK(code_of([&] { run_sweep(c, {"h", {1.0}}, 2); }) == ErrorCode::ConfigError);

  // 41 samples: every point fails, and the failure stays in its row
  const SweepAxis axis{"h", {0.9, 1.1, -1.0, 1.3}};
  const auto rows = run_sweep(c, axis, 3);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].value == axis.values[i]);
    CHECK_FALSE(rows[i].ok);
    CHECK_FALSE(rows[i].error.empty());
  }
  std::ostringstream os;
  write_sweep_table(os, axis, rows, TableFormat::Csv);
  CHECK(os.str().rfind("h,omega_sq,period,classification,error\n", 0) == 0);
}

TEST_CASE("sweep rows do not depend on the worker count") {
  const auto c = parse_config({{"backend", "free_fermion"},
                               {"chain", {{"n", 60}, {"gamma_x", 0.8}, {"gamma_y", 0.2}, {"h", 0.8}}},
                               {"quench", {{"h", 1.1}}},
                               {"grid", {{"t_max", 30.0}, {"dt", 0.05}}}});
  const SweepAxis axis{"h", {1.2, 1.3}};
  const auto one = run_sweep(c, axis, 1);
  const auto two = run_sweep(c, axis, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    INFO(one[i].error);
    REQUIRE(one[i].ok);
    CHECK(one[i].omega_sq == two[i].omega_sq);
    CHECK(one[i].classification == two[i].classification);
    CHECK(one[i].omega_sq < 0.0);
  }
}

TEST_CASE("bundled configs survive quench followed by fit") {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(QP_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto c = load_config(entry.path().string());
    const auto r = run_quench(c);
    CHECK_NOTHROW(run_fit(r.trajectory));
    ++seen;
  }
  CHECK(seen >= 5);
}
