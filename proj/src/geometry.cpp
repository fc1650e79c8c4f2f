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

#include "quenchphase/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quenchphase/errors.hpp"

namespace qp {

namespace {

constexpr double kPurityFloor = 1e-14;

// Continuous argument of a + b e^{ix} along [0, x], zero at x = 0.
// |a| = |b| (up to rounding) passes through zero; keep the principal value.
double lifted_arg(double a, double b, double x) {
  if (a == 0.0 && b == 0.0) return 0.0;
  if (std::abs(b) - std::abs(a) > 1e-12 * (std::abs(a) + std::abs(b))) {
    const double q = a / b;
    return x + std::atan2(-q * std::sin(x), 1.0 + q * std::cos(x));
  }
  const double q = b / a;
  return std::atan2(q * std::sin(x), 1.0 + q * std::cos(x));
}

double weight(int k, double r0, double rt) {
  const double sgn = k == 0 ? 1.0 : -1.0;
  return 0.5 * std::sqrt(std::max(0.0, (1.0 + sgn * rt) * (1.0 + sgn * r0)));
}

}  // namespace

double BlochAngles::chi(int k, std::size_t i) const { return 0.5 * theta.at(i) + 0.5 * k * std::numbers::pi; }

BlochAngles to_angles(const BlochTrajectory& traj) {
  traj.validate();
  BlochAngles out;
  out.times = traj.times;
  const std::size_t n = traj.size();
  out.r.resize(n);
  out.theta.resize(n);
  out.phi.resize(n);
  out.phi_propagated.assign(n, false);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = traj.states[i];
    const double r = s.purity();
    if (!(r >= kPurityFloor))
      fail(ErrorCode::PurityVanished, "Bloch radius vanishes at t = " + std::to_string(traj.times[i]));
    out.r[i] = r;
    out.theta[i] = std::acos(std::clamp(s.rho_z / r, -1.0, 1.0));
    if (s.rho_x == 0.0 && s.rho_y == 0.0) {
      out.phi[i] = prev;
      out.phi_propagated[i] = true;
      continue;
    }
    double phi = std::atan2(s.rho_y, s.rho_x);
    if (i > 0) phi = prev + std::remainder(phi - prev, 2.0 * std::numbers::pi);
    out.phi[i] = prev = phi;
  }
  return out;
}

AngleSample sample(const BlochAngles& a, std::size_t i) { return {a.r.at(i), a.theta.at(i), a.phi.at(i)}; }

double total_phase(const AngleSample& a0, const AngleSample& at) {
  const double dphi = at.phi - a0.phi;
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double c0 = 0.5 * a0.theta + 0.5 * k * std::numbers::pi;
    const double ct = 0.5 * at.theta + 0.5 * k * std::numbers::pi;
    const double w = weight(k, a0.r, at.r);
    if (w == 0.0) continue;
    sum += w * lifted_arg(std::cos(c0) * std::cos(ct), std::sin(c0) * std::sin(ct), dphi);
  }
  return sum;
}

std::vector<double> dynamic_phase(const BlochAngles& a, double max_dphi) {
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  auto integrand = [&](std::size_t i) {
    double f = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double s = std::sin(a.chi(k, i));
      f += (1.0 + (k == 0 ? a.r[i] : -a.r[i])) * s * s;
    }
    return 0.5 * f;
  };
  double f_prev = n ? integrand(0) : 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double dphi = a.phi[i] - a.phi[i - 1];
    if (std::abs(dphi) >= max_dphi)
      fail(ErrorCode::GridTooCoarse, "phi step " + std::to_string(dphi) + " at t = " + std::to_string(a.times[i]));
    const double f = integrand(i);
    out[i] = out[i - 1] + 0.5 * (f_prev + f) * dphi;
    f_prev = f;
  }
  return out;
}

PhaseRecord geometric_phase(const BlochAngles& a, double t_star, double max_dphi) {
  PhaseRecord rec;
  rec.times = a.times;
  rec.t_star = t_star;
  rec.phi_dynamic = dynamic_phase(a, max_dphi);
  const std::size_t n = a.size();
  rec.phi_total.resize(n);
  rec.phi_geometric.resize(n);
  if (n == 0) return rec;
  const AngleSample s0 = sample(a, 0);
  for (std::size_t i = 0; i < n; ++i) {
    rec.phi_total[i] = total_phase(s0, sample(a, i));
    rec.phi_geometric[i] = rec.phi_total[i] - rec.phi_dynamic[i];
  }
  const auto it = std::lower_bound(a.times.begin(), a.times.end(), t_star);
  rec.phi_dynamic_short = rec.phi_dynamic[std::min<std::size_t>(it - a.times.begin(), n - 1)];
  return rec;
}

AsymptoticCoefficients asymptotic_coefficients(double r0, double rho_z_inf, double null_threshold) {
  if (!(std::abs(rho_z_inf) <= 1.0)) fail(ErrorCode::InvalidArgument, "|rho_z(inf)| > 1");
  if (!(r0 >= 0.0 && r0 <= 1.0 + 1e-9)) fail(ErrorCode::InvalidArgument, "r(0) outside [0, 1]");
  r0 = std::min(r0, 1.0);
  AsymptoticCoefficients c;
  c.r0 = r0;
  c.r_inf = std::abs(rho_z_inf);
  if (c.r_inf < null_threshold) {
    c.branch = AsymptoticBranch::Null;
    c.s = 0.0;
  } else {
    c.s = rho_z_inf > 0 ? 1.0 : -1.0;
    c.branch = rho_z_inf > 0 ? AsymptoticBranch::Positive : AsymptoticBranch::Negative;
  }
  const double u = 1.0 - c.s * c.r_inf;
  c.c = std::sqrt(u * (1.0 - c.s * r0)) - u;
  c.k = std::sqrt(1.0 + r0) + std::sqrt(1.0 - r0);
  return c;
}

SlopeReport asymptotic_prediction_check(const PhaseRecord& rec, const AsymptoticCoefficients& coeffs,
                                        const BlochAngles& angles, TimeWindow window) {
  if (rec.times.size() != angles.size()) fail(ErrorCode::GridMismatch, "record and angles differ in length");
  if (window.begin < rec.t_star) fail(ErrorCode::InvalidArgument, "window starts before t_star");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    if (rec.times[i] >= window.begin && rec.times[i] <= window.end) idx.push_back(i);
  if (idx.size() < 10) fail(ErrorCode::WindowTooShort, "fewer than 10 samples in window");

  SlopeReport rep;
  rep.samples = idx.size();
  rep.expected = 0.5 * coeffs.c;
  double mx = 0, my = 0;
  for (auto i : idx) {
    mx += angles.phi[i];
    my += rec.phi_geometric[i];
  }
  mx /= double(idx.size());
  my /= double(idx.size());
  double sxx = 0, sxy = 0;
  for (auto i : idx) {
    sxx += (angles.phi[i] - mx) * (angles.phi[i] - mx);
    sxy += (angles.phi[i] - mx) * (rec.phi_geometric[i] - my);
  }
  if (sxx < 1e-18 * double(idx.size())) fail(ErrorCode::WindowTooShort, "phi is constant over the window");
  rep.slope = sxy / sxx;
  rep.relative_error = std::abs(rep.slope - rep.expected) / std::max(std::abs(rep.expected), 1e-12);

  if (coeffs.branch == AsymptoticBranch::Null) {
    rep.null_branch = true;
    for (auto i : idx) {
      const double pred = 0.5 * coeffs.k * lifted_arg(0.5, 0.5, angles.phi[i] - angles.phi[0]);
      rep.max_residual = std::max(rep.max_residual, std::abs(rec.phi_total[i] - pred));
    }
  }
  return rep;
}

}  // namespace qp
