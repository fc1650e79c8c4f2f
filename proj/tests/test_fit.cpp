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
#include <numbers>
#include <random>

#include "doctest.h"
#include "quenchphase/errors.hpp"
#include "quenchphase/fit.hpp"
#include "quenchphase/lindblad.hpp"

using namespace qp;
using std::numbers::pi;

namespace {

std::vector<double> grid(double dt, double t_max) {
  TimeGrid g{dt, t_max};
  return g.points();
}

// lambda_s = 0.2, omega^2 = -1
DissipatorParams oscillatory() {
  DissipatorParams p;
  p.h_z = 0.5;
  p.lambda_x = p.lambda_y = 0.1;
  return p;
}

// lambda_s = 0.8, omega^2 = 0.36
DissipatorParams overdamped() {
  DissipatorParams p;
  p.alpha = 0.3;
  p.h_z = 0.1;
  p.lambda_x = 0.5;
  p.lambda_y = 0.3;
  return p;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("noiseless model data: parameters recovered on both branches") {
  const BlochVector b0{0.7, 0.2, 0.4};
  for (const auto& p : {oscillatory(), overdamped()}) {
    const auto rates = derive_rates(p);
    const auto traj = evolve_analytic(p, b0, grid(0.02, 40.0));
    const auto f = fit_open_system(traj, 0.0);
    CHECK(f.lambda_s == doctest::Approx(rates.lambda_s).epsilon(1e-6));
    CHECK(f.omega_sq == doctest::Approx(rates.omega_sq).epsilon(1e-6));
    CHECK(f.rho_z_inf == doctest::Approx(0.4));
    CHECK(f.residual < 1e-9);
    CHECK(f.other_residual > 100 * f.residual);
    for (double t : {0.0, 3.3, 17.0}) {
      const auto want = evolve_analytic(p, b0, t), got = f.predict(t);
      CHECK(got.rho_x == doctest::Approx(want.rho_x).epsilon(1e-7));
      CHECK(got.rho_y == doctest::Approx(want.rho_y).epsilon(1e-7));
    }
  }
}

TEST_CASE("fit is referenced to t_star") {
  const auto p = oscillatory();
  const auto traj = evolve_analytic(p, {0.7, 0.2, 0.4}, grid(0.02, 40.0));
  const auto f = fit_open_system(traj, 7.0);
  CHECK(f.t_star == 7.0);
  CHECK(f.omega_sq == doctest::Approx(-1.0).epsilon(1e-6));
  const auto at = evolve_analytic(p, {0.7, 0.2, 0.4}, 7.0);
  CHECK(f.amp_x * std::cos(f.phase_x) == doctest::Approx(at.rho_x).epsilon(1e-7));
}

TEST_CASE("classification of model data") {
  const BlochVector b0{0.7, 0.2, 0.4};
  CHECK(fit_open_system(evolve_analytic(oscillatory(), b0, grid(0.02, 80.0)), 0.0).classification ==
        Classification::Paramagnetic);
  CHECK(fit_open_system(evolve_analytic(overdamped(), b0, grid(0.02, 40.0)), 0.0).classification ==
        Classification::Ordered);
}

TEST_CASE("fit is deterministic") {
  auto traj = evolve_analytic(oscillatory(), {0.5, -0.3, 0.2}, grid(0.05, 30.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (auto& s : traj.states) s.rho_x += g(rng);
  const auto a = fit_open_system(traj, 1.0), b = fit_open_system(traj, 1.0);
  CHECK(a.lambda_s == b.lambda_s);
  CHECK(a.omega_sq == b.omega_sq);
  CHECK(a.residual == b.residual);
}

TEST_CASE("noise does not change the classification") {
  const BlochVector b0{0.7, 0.2, 0.4};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1e-4);
  for (int trial = 0; trial < 3; ++trial) {
    auto osc = evolve_analytic(oscillatory(), b0, grid(0.02, 40.0));
    auto over = evolve_analytic(overdamped(), b0, grid(0.02, 40.0));
    for (auto* t : {&osc, &over})
      for (auto& s : t->states) {
        s.rho_x += g(rng);
        s.rho_y += g(rng);
      }
    CHECK(fit_open_system(osc, 0.0).classification == Classification::Paramagnetic);
    CHECK(fit_open_system(over, 0.0).classification == Classification::Ordered);
  }
}

TEST_CASE("critical damping is refused as ambiguous") {
  // omega^2 = 4 (alpha^2 - h_z^2) + (lambda_x - lambda_y)^2 = 0
  DissipatorParams p;
  p.h_z = 0.2;
  p.lambda_x = 0.5;
  p.lambda_y = 0.1;
  auto traj = evolve_analytic(p, {0.7, 0.2, 0.4}, grid(0.02, 40.0));
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1e-4);
  for (auto& s : traj.states) s.rho_x += g(rng);
  CHECK(code_of([&] { fit_open_system(traj, 0.0); }) == ErrorCode::AmbiguousBranch);
}

TEST_CASE("fit preconditions") {
  const auto traj = evolve_analytic(oscillatory(), {0.7, 0.2, 0.4}, grid(0.1, 10.0));
  CHECK(code_of([&] { fit_open_system(traj, 9.0); }) == ErrorCode::WindowTooShort);
  CHECK(code_of([&] { fit_open_system(traj, 11.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("t* selection") {
  SUBCASE("model data starts immediately") {
    // envelope points of an oscillation are its peaks: t* is the first one
    CHECK(select_tstar(evolve_analytic(oscillatory(), {0.7, 0.2, 0.4}, grid(0.01, 40.0))) < pi / 2);
    // single slow exponential
    DissipatorParams p;
    p.lambda_x = p.lambda_y = 0.1;
    CHECK(select_tstar(evolve_analytic(p, {0.7, 0.2, 0.4}, grid(0.01, 40.0))) == 0.0);
  }
  SUBCASE("transient bump delays t*") {
    DissipatorParams p;
    p.h_z = 1.5;
    p.lambda_x = p.lambda_y = 0.1;
    auto traj = evolve_analytic(p, {0.6, 0.0, 0.2}, grid(0.01, 20.0));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.times[i];
      if (t < 2.0) traj.states[i].rho_x += 0.25;
    }
    CHECK(select_tstar(traj) >= 2.0);
  }
  SUBCASE("constant trajectory") {
    BlochTrajectory t;
    for (double s : grid(0.1, 10.0)) {
      t.times.push_back(s);
      t.states.push_back({0.3, 0.1, 0.2});
    }
    CHECK(code_of([&] { select_tstar(t); }) == ErrorCode::InsufficientDecay);
  }
}

TEST_CASE("periodicity detection") {
  std::vector<double> sine, sat;
  const double dt = 0.01;
  for (int i = 0; i < 5000; ++i) {
    sine.push_back(std::sin(2 * pi * i * dt / 3.7) + 0.01 * i * dt);
    sat.push_back(1.0 - std::exp(-0.5 * i * dt));
  }
  const auto per = detect_periodicity(sine, dt);
  REQUIRE(per);
  CHECK(*per == doctest::Approx(3.7).epsilon(0.01));
  CHECK_FALSE(detect_periodicity(sat, dt));
  CHECK_FALSE(detect_periodicity(std::vector<double>(100, 2.0), dt));

  // the same sine scaled below the amplitude floor
  std::vector<double> faint(sine.size());
  for (std::size_t i = 0; i < sine.size(); ++i) faint[i] = 1e-4 * sine[i] + 3.0;
  CHECK_FALSE(detect_periodicity(faint, dt));
  PeriodicityOptions any;
  any.min_amplitude = 0.0;
  const auto faint_per = detect_periodicity(faint, dt, any);
  REQUIRE(faint_per);
  CHECK(*faint_per == doctest::Approx(*per).epsilon(1e-6));
}

TEST_CASE("azimuth period of a uniform rotation") {
  const auto traj = evolve_analytic(oscillatory(), {0.7, 0.0, 0.4}, grid(0.01, 60.0));
  const auto per = azimuth_period(traj);
  REQUIRE(per);
  CHECK(*per == doctest::Approx(2 * pi).epsilon(0.01));
  CHECK_FALSE(azimuth_period(evolve_analytic(overdamped(), {0.7, 0.2, 0.4}, grid(0.01, 30.0))));
}

TEST_CASE("phase classification rules") {
  OpenSystemFit f;
  f.omega_sq = -4.0;
  CHECK(classify_phase(f, pi) == Classification::Paramagnetic);
  CHECK(classify_phase(f, std::nullopt) == Classification::Inconclusive);
  CHECK(classify_phase(f, 2.0) == Classification::Inconclusive);
  f.omega_sq = 0.04;
  CHECK(classify_phase(f, std::nullopt) == Classification::Ordered);
  CHECK(classify_phase(f, 1.0) == Classification::Inconclusive);
  CHECK(to_string(Classification::Ordered) == "Ordered");
}
