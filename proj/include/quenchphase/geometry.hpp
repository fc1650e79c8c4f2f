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

#pragma once

#include <optional>
#include <vector>

#include "quenchphase/bloch.hpp"

namespace qp {

/// (r, theta, phi) along a trajectory. phi is unwrapped; samples with
/// rho_x = rho_y = 0 inherit phi from the previous sample and are flagged.
struct BlochAngles {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<bool> phi_propagated;

  std::size_t size() const { return times.size(); }
  /// chi_{k,i} = theta_i / 2 + k pi / 2
  double chi(int k, std::size_t i) const;
};

/// Throws PurityVanished when r < 1e-14 at any sample.
BlochAngles to_angles(const BlochTrajectory& traj);

/// Single sample of an angle trajectory.
struct AngleSample {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

AngleSample sample(const BlochAngles& a, std::size_t i);

/// Two-term total phase between the endpoints. Each term is the continuous
/// argument of cos(chi_0)cos(chi_t) + e^{i dphi} sin(chi_0)sin(chi_t) along
/// dphi in [0, phi_t - phi_0], i.e. the arctangent lifted off its branch.
double total_phase(const AngleSample& a0, const AngleSample& at);

/// Cumulative trapezoid in phi of (1/2) sum_k (1 + (-1)^k r) sin^2 chi_k.
/// Throws GridTooCoarse if any |dphi| >= max_dphi.
std::vector<double> dynamic_phase(const BlochAngles& a, double max_dphi = 0.1);

struct PhaseRecord {
  std::vector<double> times;
  std::vector<double> phi_total;
  std::vector<double> phi_dynamic;
  std::vector<double> phi_geometric;
  double phi_dynamic_short = 0.0;  // phi_dynamic at the first sample with t >= t_star
  double t_star = 0.0;
};

PhaseRecord geometric_phase(const BlochAngles& a, double t_star, double max_dphi = 0.1);

enum class AsymptoticBranch { Positive, Negative, Null };

/// s = sign(rho_z(inf)); C = sqrt((1 - s r_inf)(1 - s r0)) - (1 - s r_inf);
/// K = sqrt(1 + r0) + sqrt(1 - r0). On the Null branch s enters as 0.
struct AsymptoticCoefficients {
  AsymptoticBranch branch = AsymptoticBranch::Null;
  double s = 0.0;
  double r0 = 0.0;
  double r_inf = 0.0;
  double c = 0.0;
  double k = 0.0;
};

AsymptoticCoefficients asymptotic_coefficients(double r0, double rho_z_inf, double null_threshold = 1e-6);

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

struct SlopeReport {
  bool null_branch = false;
  std::size_t samples = 0;
  double slope = 0.0;           // least squares d(phi_g)/d(phi) over the window
  double expected = 0.0;        // C / 2
  double relative_error = 0.0;  // |slope - expected| / max(|expected|, 1e-12)
  double max_residual = 0.0;    // Null branch: max |phi_t - (K/2) * lifted atan|
};

/// Throws InvalidArgument when the window starts before t_star and
/// WindowTooShort when it holds fewer than 10 samples or phi barely moves.
SlopeReport asymptotic_prediction_check(const PhaseRecord& rec, const AsymptoticCoefficients& coeffs,
                                        const BlochAngles& angles, TimeWindow window);

}  // namespace qp
