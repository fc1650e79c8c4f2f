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

#include "doctest.h"
#include "quenchphase/errors.hpp"
#include "quenchphase/geometry.hpp"
#include "quenchphase/lindblad.hpp"

using namespace qp;
using std::numbers::pi;

namespace {

BlochTrajectory single(BlochVector v) { return {{0.0}, {v}}; }

// Pure-state precession at fixed polar angle, n samples over [0, 2 pi cycles].
BlochTrajectory precession(double theta, double phi_end, int n, double r = 1.0) {
  BlochTrajectory t;
  for (int i = 0; i <= n; ++i) {
    const double phi = phi_end * i / n;
    t.times.push_back(double(i));
    t.states.push_back({r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)});
  }
  return t;
}

// Total phase written directly from its two-term arctangent form.
double direct_total_phase(AngleSample a0, AngleSample at) {
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double sg = k == 0 ? 1.0 : -1.0;
    const double c0 = a0.theta / 2 + k * pi / 2, ct = at.theta / 2 + k * pi / 2;
    const double d = at.phi - a0.phi;
    const double num = std::sin(d) * std::sin(c0) * std::sin(ct);
    const double den = std::cos(c0) * std::cos(ct) + std::cos(d) * std::sin(c0) * std::sin(ct);
    sum += std::sqrt((1 + sg * at.r) * (1 + sg * a0.r)) / 2 * std::atan(num / den);
  }
  return sum;
}

double wrap(double x) { return std::remainder(x, 2 * pi); }

}  // namespace

TEST_CASE("north pole has r = 1, theta = 0 and a propagated azimuth") {
  const auto a = to_angles(single({0, 0, 1}));
  CHECK(a.r[0] == doctest::Approx(1.0));
  CHECK(a.theta[0] == doctest::Approx(0.0));
  CHECK(a.phi_propagated[0]);
}

TEST_CASE("azimuth unwraps through pi") {
  const auto a = to_angles(precession(pi / 2, 1.5 * pi, 300));
  CHECK(a.phi.back() == doctest::Approx(1.5 * pi));
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(std::abs(a.phi[i] - a.phi[i - 1]) < pi);
}

TEST_CASE("radius and polar angle follow their definitions") {
  const BlochVector v{0.3, -0.2, 0.4};
  const auto a = to_angles(single(v));
  CHECK(a.r[0] == doctest::Approx(std::sqrt(0.29)).epsilon(1e-13));
  CHECK(a.theta[0] == doctest::Approx(std::acos(0.4 / std::sqrt(0.29))));
  CHECK(a.phi[0] == doctest::Approx(std::atan2(-0.2, 0.3)));
  CHECK(a.chi(1, 0) == doctest::Approx(a.theta[0] / 2 + pi / 2));
}

TEST_CASE("vanishing Bloch vector is rejected") {
  try {
    to_angles(single({0, 0, 0}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PurityVanished);
  }
}

TEST_CASE("pure h_z precession gives a linear azimuth") {
  DissipatorParams p;
  p.h_z = 0.35;
  std::vector<double> ts;
  for (int i = 0; i <= 2000; ++i) ts.push_back(0.005 * i);
  const auto a = to_angles(evolve_analytic(p, {0.6, 0.0, 0.5}, ts));
  const Eigen::Matrix4d u = build_generator(p);
  const double rate = -2.0 * u(2, 1);  // d rho_y / dt at rho = x-axis
  for (std::size_t i = 0; i < a.size(); i += 100) CHECK(a.phi[i] == doctest::Approx(rate * ts[i]).epsilon(1e-10));
}

TEST_CASE("total phase vanishes between identical samples") {
  const AngleSample s{0.7, 1.1, 2.3};
  CHECK(total_phase(s, s) == doctest::Approx(0.0));
}

TEST_CASE("total phase agrees with the arctangent form on its principal branch") {
  CHECK(total_phase({1, pi / 2, 0}, {1, pi / 2, pi / 2}) == doctest::Approx(pi / 4));
  CHECK(total_phase({1, pi / 2, 0}, {1, pi / 2, pi / 2}) == doctest::Approx(direct_total_phase({1, pi / 2, 0}, {1, pi / 2, pi / 2})));
  const AngleSample a0{0.8, 0.7, 0.1}, at{0.5, 1.2, 0.9};
  CHECK(total_phase(a0, at) == doctest::Approx(direct_total_phase(a0, at)).epsilon(1e-12));
}

TEST_CASE("total phase reduces to the linear long-time law as theta -> 0") {
  const double r0 = 0.6, rt = 0.4, dphi = 3.5;
  const double got = total_phase({r0, 1.0, 0.2}, {rt, 1e-8, 0.2 + dphi});
  CHECK(got == doctest::Approx(0.5 * std::sqrt((1 - rt) * (1 - r0)) * dphi).epsilon(1e-6));
  // southern pole: s = -1
  const double gs = total_phase({r0, 1.0, 0.2}, {rt, pi - 1e-8, 0.2 + dphi});
  CHECK(gs == doctest::Approx(0.5 * std::sqrt((1 + rt) * (1 + r0)) * dphi).epsilon(1e-6));
}

TEST_CASE("total phase depends only on the endpoints") {
  const auto fine = to_angles(precession(1.0, 5.0, 5000, 0.9));
  const auto coarse = to_angles(precession(1.0, 5.0, 100, 0.9));
  CHECK(total_phase(sample(fine, 0), sample(fine, fine.size() - 1)) ==
        doctest::Approx(total_phase(sample(coarse, 0), sample(coarse, coarse.size() - 1))).epsilon(1e-14));
}

TEST_CASE("dynamic phase") {
  SUBCASE("no azimuthal motion") {
    BlochTrajectory t;
    for (int i = 0; i < 50; ++i) {
      t.times.push_back(0.1 * i);
      t.states.push_back({0.3, 0.3, 0.8 - 0.01 * i});
    }
    for (double v : dynamic_phase(to_angles(t))) CHECK(v == 0.0);
  }
  SUBCASE("equatorial great circle") {
    const auto d = dynamic_phase(to_angles(precession(pi / 2, 2 * pi, 1000)));
    CHECK(d.front() == 0.0);
    CHECK(d.back() == doctest::Approx(pi));
  }
  SUBCASE("step halving converges") {
    // r and theta vary along the path so the trapezoid has something to do
    auto path = [](int n) {
      BlochTrajectory t;
      for (int i = 0; i <= n; ++i) {
        const double s = double(i) / n, phi = 4.0 * s, th = 0.6 + 0.8 * s * s, r = 0.9 - 0.3 * s;
        t.times.push_back(s);
        t.states.push_back({r * std::sin(th) * std::cos(phi), r * std::sin(th) * std::sin(phi), r * std::cos(th)});
      }
      return dynamic_phase(to_angles(t)).back();
    };
    const double a = path(1000), b = path(2000), c = path(4000);
    CHECK(std::abs(a - b) < 1e-6);
    CHECK(std::abs(b - c) == doctest::Approx(std::abs(a - b) / 4).epsilon(0.05));
  }
  SUBCASE("additive over adjacent intervals") {
    const auto a = to_angles(precession(0.9, 3.0, 600, 0.8));
    const auto d = dynamic_phase(a);
    BlochAngles tail = a;
    const std::size_t m = 250;
    for (auto* v : {&tail.times, &tail.r, &tail.theta, &tail.phi}) v->erase(v->begin(), v->begin() + m);
    tail.phi_propagated.erase(tail.phi_propagated.begin(), tail.phi_propagated.begin() + m);
    CHECK(d.back() == doctest::Approx(d[m] + dynamic_phase(tail).back()).epsilon(1e-12));
  }
  SUBCASE("coarse grid rejected") {
    try {
      dynamic_phase(to_angles(precession(pi / 2, 2.0, 10)));
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooCoarse);
    }
  }
}

TEST_CASE("geometric phase") {
  SUBCASE("static trajectory") {
    BlochTrajectory t;
    for (int i = 0; i < 20; ++i) {
      t.times.push_back(i);
      t.states.push_back({0.2, 0.4, 0.1});
    }
    const auto rec = geometric_phase(to_angles(t), 0.0);
    for (double v : rec.phi_geometric) CHECK(v == 0.0);
  }
  SUBCASE("difference identity holds exactly") {
    const auto rec = geometric_phase(to_angles(precession(1.2, 4.0, 800, 0.7)), 300.0);
    for (std::size_t i = 0; i < rec.times.size(); ++i)
      CHECK(rec.phi_geometric[i] == rec.phi_total[i] - rec.phi_dynamic[i]);
    CHECK(rec.phi_dynamic_short == rec.phi_dynamic[300]);
  }
  SUBCASE("solid angle on cyclic pure paths") {
    for (double th : {pi / 6, pi / 3, pi / 2}) {
      const auto rec = geometric_phase(to_angles(precession(th, 2 * pi, 10000)), 0.0);
      CHECK(std::abs(wrap(rec.phi_geometric.back() + pi * (1 - std::cos(th)))) < 1e-4);
    }
  }
  SUBCASE("overdamped trajectory settles") {
    DissipatorParams p;
    p.alpha = 0.5;
    p.h_z = 0.2;
    p.lambda_x = 0.8;
    p.lambda_y = 0.6;
    std::vector<double> ts;
    for (int i = 0; i <= 6000; ++i) ts.push_back(0.01 * i);
    const auto rec = geometric_phase(to_angles(evolve_analytic(p, {0.6, 0.1, 0.5}, ts)), 0.0);
    CHECK(std::abs(rec.phi_geometric[5000] - rec.phi_geometric.back()) < 1e-6);
  }
}

TEST_CASE("asymptotic coefficients") {
  auto c = asymptotic_coefficients(1.0, 1.0);
  CHECK(c.s == 1.0);
  CHECK(c.c == 0.0);
  c = asymptotic_coefficients(0.0, 0.0);
  CHECK(c.branch == AsymptoticBranch::Null);
  CHECK(c.k == 2.0);
  c = asymptotic_coefficients(0.5, -0.3);
  CHECK(c.branch == AsymptoticBranch::Negative);
  CHECK(c.c == std::sqrt(1.3 * 1.5) - 1.3);
  CHECK(asymptotic_coefficients(0.5, 5e-7).branch == AsymptoticBranch::Null);
  CHECK_THROWS_AS(asymptotic_coefficients(0.5, 1.5), Error);
}

namespace {

// Record and angles with a prescribed phi(t) and phi_g(t).
std::pair<PhaseRecord, BlochAngles> synthetic(double c_half, int n) {
  PhaseRecord rec;
  BlochAngles a;
  for (int i = 0; i < n; ++i) {
    const double t = 0.05 * i, phi = 0.7 * t + 0.2 * std::sin(t);
    rec.times.push_back(t);
    a.times.push_back(t);
    a.phi.push_back(phi);
    a.r.push_back(0.5);
    a.theta.push_back(0.0);
    a.phi_propagated.push_back(false);
    rec.phi_total.push_back(0.0);
    rec.phi_dynamic.push_back(0.0);
    rec.phi_geometric.push_back(c_half * phi + 1.3);
  }
  return {rec, a};
}

}  // namespace

TEST_CASE("slope check on a synthetic linear record") {
  const auto coeffs = asymptotic_coefficients(0.8, 0.4);
  auto [rec, a] = synthetic(0.5 * coeffs.c, 400);
  const auto rep = asymptotic_prediction_check(rec, coeffs, a, {5.0, 19.0});
  CHECK(rep.relative_error < 1e-12);
  CHECK_FALSE(rep.null_branch);
  try {
    asymptotic_prediction_check(rec, coeffs, a, {5.0, 5.2});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowTooShort);
  }
  rec.t_star = 6.0;
  CHECK_THROWS_AS(asymptotic_prediction_check(rec, coeffs, a, {5.0, 19.0}), Error);
}

TEST_CASE("null branch compares the total phase against its nonlinear form") {
  const double r0 = 0.6;
  BlochTrajectory t;
  for (int i = 0; i <= 3000; ++i) {
    const double s = 0.01 * i, r = r0 * std::exp(-0.5 * s), phi = 0.3 + 0.8 * s;
    t.times.push_back(s);
    t.states.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
  }
  const auto a = to_angles(t);
  const auto rec = geometric_phase(a, 0.0);
  const auto rep = asymptotic_prediction_check(rec, asymptotic_coefficients(r0, 0.0), a, {20.0, 30.0});
  CHECK(rep.null_branch);
  CHECK(rep.max_residual < 1e-3);
}

TEST_CASE("late-window slope converges to C/2") {
  DissipatorParams p;
  p.alpha = 0.2;
  p.h_z = 0.6;
  p.lambda_x = 0.06;
  p.lambda_y = 0.04;
  const BlochVector b0{0.6, 0.0, 0.5};
  std::vector<double> ts;
  for (int i = 0; i <= 8000; ++i) ts.push_back(0.01 * i);
  const auto a = to_angles(evolve_analytic(p, b0, ts));
  const auto rec = geometric_phase(a, 0.0);
  const auto coeffs = asymptotic_coefficients(b0.purity(), b0.rho_z);
  double prev = 1e300;
  for (double start : {10.0, 30.0, 50.0}) {
    const auto rep = asymptotic_prediction_check(rec, coeffs, a, {start, start + 30.0});
    CHECK(rep.relative_error < prev);
    prev = rep.relative_error;
  }
  CHECK(prev < 0.02);
}
