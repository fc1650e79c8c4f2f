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

#include <vector>

#include <Eigen/Dense>

#include "quenchphase/bloch.hpp"

namespace qp {

/// Shared threshold separating the three branches of the analytic solution.
inline constexpr double kOmegaEpsilon = 1e-12;

/// RK4 is stable for dt*||2U||_inf up to roughly 2.78 along the real axis and
/// 2.83 along the imaginary axis; we refuse steps beyond this margin.
inline constexpr double kRk4StabilityBound = 2.5;

/// Parameters of the real 4x4 generator U; the Bloch vector obeys
/// d(rho)/dt = -2 U rho (note the factor 2).
struct DissipatorParams {
  double h_x = 0.0, h_y = 0.0, h_z = 0.0;
  double alpha = 0.0, beta = 0.0, delta = 0.0;
  double lambda_x = 0.0, lambda_y = 0.0, lambda_z = 0.0;

  /// Throws InvalidArgument on negative or non-finite rates.
  void validate() const;
};

bool parity_constrained(const DissipatorParams& p);

Eigen::Matrix4d build_generator(const DissipatorParams& p);

struct DerivedRates {
  double lambda_s = 0.0;
  double lambda_d = 0.0;
  double omega_sq = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
  /// Real coefficients of the sinh (omega_sq > 0) or sin (omega_sq < 0) term,
  /// i.e. already divided by |omega|.
  double a_x = 0.0;
  double a_y = 0.0;
};

/// Throws OmegaDegenerate when |omega_sq| < eps, InvalidArgument when p is
/// not parity constrained.
DerivedRates derive_rates(const DissipatorParams& p, const BlochVector& b0,
                          double eps = kOmegaEpsilon);

/// Rates without the amplitudes; never throws on degeneracy.
DerivedRates derive_rates(const DissipatorParams& p);

enum class Damping { Overdamped, Oscillatory, Critical };

struct DampingClass {
  Damping kind = Damping::Critical;
  double frequency = 0.0;  // |omega|, meaningful for Oscillatory
  double period = 0.0;     // 2*pi/|omega| for Oscillatory, 0 otherwise
};

DampingClass classify_damping(const DerivedRates& rates, double eps = kOmegaEpsilon);

BlochVector evolve_analytic(const DissipatorParams& p, const BlochVector& b0, double t,
                            double eps = kOmegaEpsilon);

BlochTrajectory evolve_analytic(const DissipatorParams& p, const BlochVector& b0,
                                const std::vector<double>& times, double eps = kOmegaEpsilon);

/// Classical RK4 with step grid.dt; any parameter set (parity need not hold).
/// Throws StepTooLarge when dt*||2U||_inf > kRk4StabilityBound.
BlochTrajectory evolve_numeric(const DissipatorParams& p, const BlochVector& b0,
                               const TimeGrid& grid);

/// Same, with `substeps` RK4 steps per grid interval.
BlochTrajectory evolve_numeric(const DissipatorParams& p, const BlochVector& b0,
                               const TimeGrid& grid, int substeps);

}  // namespace qp
