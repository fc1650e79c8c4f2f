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

#include "quenchphase/lindblad.hpp"

#include <cmath>
#include <numbers>

#include "quenchphase/errors.hpp"

namespace qp {

void DissipatorParams::validate() const {
  for (double v : {h_x, h_y, h_z, alpha, beta, delta, lambda_x, lambda_y, lambda_z}) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite dissipator parameter");
  }
  if (lambda_x < 0.0 || lambda_y < 0.0 || lambda_z < 0.0) {
    fail(ErrorCode::InvalidArgument, "decay rates must be non-negative");
  }
}

bool parity_constrained(const DissipatorParams& p) {
  return p.beta == 0.0 && p.delta == 0.0 && p.h_x == 0.0 && p.h_y == 0.0;
}

Eigen::Matrix4d build_generator(const DissipatorParams& p) {
  p.validate();
  Eigen::Matrix4d u = Eigen::Matrix4d::Zero();
  u(1, 1) = p.lambda_x;
  u(1, 2) = p.alpha - p.h_z;
  u(1, 3) = p.beta - p.h_y;
  u(2, 1) = p.alpha + p.h_z;
  u(2, 2) = p.lambda_y;
  u(2, 3) = p.delta - p.h_x;
  u(3, 1) = p.beta + p.h_y;
  u(3, 2) = p.delta + p.h_x;
  u(3, 3) = p.lambda_z;
  return u;
}

DerivedRates derive_rates(const DissipatorParams& p) {
  p.validate();
  DerivedRates r;
  r.lambda_s = p.lambda_x + p.lambda_y;
  r.lambda_d = p.lambda_x - p.lambda_y;
  r.zeta_plus = p.alpha + p.h_z;
  r.zeta_minus = p.alpha - p.h_z;
  r.omega_sq = 4.0 * r.zeta_plus * r.zeta_minus + r.lambda_d * r.lambda_d;
  return r;
}

DerivedRates derive_rates(const DissipatorParams& p, const BlochVector& b0, double eps) {
  if (!parity_constrained(p)) fail(ErrorCode::InvalidArgument, "derive_rates needs parity-constrained parameters");
  DerivedRates r = derive_rates(p);
  if (std::abs(r.omega_sq) < eps) fail(ErrorCode::OmegaDegenerate, "|omega^2| below threshold");
  const double w = std::sqrt(std::abs(r.omega_sq));
  r.a_x = (b0.rho_x * r.lambda_d + 2.0 * r.zeta_minus * b0.rho_y) / w;
  r.a_y = (b0.rho_y * r.lambda_d - 2.0 * r.zeta_plus * b0.rho_x) / w;
  return r;
}

DampingClass classify_damping(const DerivedRates& rates, double eps) {
  DampingClass c;
  if (rates.omega_sq > eps) {
    c.kind = Damping::Overdamped;
    c.frequency = 0.0;
  } else if (rates.omega_sq < -eps) {
    c.kind = Damping::Oscillatory;
    c.frequency = std::sqrt(-rates.omega_sq);
    c.period = 2.0 * std::numbers::pi / c.frequency;
  }
  return c;
}

namespace {

// e^{-ls t} * (C(t), S(t)) where C = cosh(wt), S = sinh(wt)/w continued
// analytically to omega_sq <= 0.
void branch_functions(double omega_sq, double ls, double t, double eps, double& c, double& s) {
  const double env = std::exp(-ls * t);
  if (omega_sq > eps) {
    const double w = std::sqrt(omega_sq);
    if (w * t < 20.0) {
      c = env * std::cosh(w * t);
      s = env * std::sinh(w * t) / w;
    } else {
      // Avoid overflow of cosh when w is close to ls.
      const double up = std::exp((w - ls) * t);
      const double dn = std::exp(-(w + ls) * t);
      c = 0.5 * (up + dn);
      s = 0.5 * (up - dn) / w;
    }
  } else if (omega_sq < -eps) {
    const double v = std::sqrt(-omega_sq);
    c = env * std::cos(v * t);
    s = env * std::sin(v * t) / v;
  } else {
    c = env;
    s = env * t;
  }
}

}  // namespace

BlochVector evolve_analytic(const DissipatorParams& p, const BlochVector& b0, double t, double eps) {
  if (!parity_constrained(p)) fail(ErrorCode::InvalidArgument, "evolve_analytic needs parity-constrained parameters");
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "evolve_analytic needs t >= 0");
  const DerivedRates r = derive_rates(p);
  const double nx = b0.rho_x * r.lambda_d + 2.0 * r.zeta_minus * b0.rho_y;
  const double ny = b0.rho_y * r.lambda_d - 2.0 * r.zeta_plus * b0.rho_x;
  double c;
  double s;
  branch_functions(r.omega_sq, r.lambda_s, t, eps, c, s);
  BlochVector out;
  out.rho_x = b0.rho_x * c - nx * s;
  out.rho_y = b0.rho_y * c + ny * s;
  out.rho_z = std::exp(-2.0 * p.lambda_z * t) * b0.rho_z;
  return out;
}

BlochTrajectory evolve_analytic(const DissipatorParams& p, const BlochVector& b0,
                                const std::vector<double>& times, double eps) {
  BlochTrajectory traj;
  traj.times = times;
  traj.states.reserve(times.size());
  for (double t : times) traj.states.push_back(evolve_analytic(p, b0, t, eps));
  return traj;
}

BlochTrajectory evolve_numeric(const DissipatorParams& p, const BlochVector& b0, const TimeGrid& grid) {
  return evolve_numeric(p, b0, grid, 1);
}

BlochTrajectory evolve_numeric(const DissipatorParams& p, const BlochVector& b0, const TimeGrid& grid,
                               int substeps) {
  grid.validate();
  if (substeps < 1) fail(ErrorCode::InvalidArgument, "substeps must be >= 1");
  const Eigen::Matrix3d m = -2.0 * build_generator(p).bottomRightCorner<3, 3>();
  const double h = grid.dt / substeps;
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  if (h * norm > kRk4StabilityBound) {
    fail(ErrorCode::StepTooLarge, "dt*||2U|| exceeds the RK4 stability bound");
  }
  // One RK4 step is the degree-4 Taylor polynomial of exp(h m).
  const Eigen::Matrix3d hm = h * m;
  const Eigen::Matrix3d hm2 = hm * hm;
  const Eigen::Matrix3d step =
      Eigen::Matrix3d::Identity() + hm + hm2 / 2.0 + hm2 * hm / 6.0 + hm2 * hm2 / 24.0;

  BlochTrajectory traj;
  traj.times = grid.points();
  traj.states.resize(traj.times.size());
  Eigen::Vector3d v(b0.rho_x, b0.rho_y, b0.rho_z);
  traj.states[0] = b0;
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    for (int s = 0; s < substeps; ++s) v = step * v;
    traj.states[k] = {v(0), v(1), v(2)};
  }
  return traj;
}

}  // namespace qp
