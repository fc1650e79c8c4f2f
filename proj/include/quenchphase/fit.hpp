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
#include <string_view>
#include <vector>

#include "quenchphase/bloch.hpp"

namespace qp {

enum class Classification { Ordered, Paramagnetic, Inconclusive };

std::string_view to_string(Classification c);

/// Long-time model with lambda_z = 0 and tau = t - t_star:
///   rho_mu(t) = e^{-lambda_s tau} [a_mu C(tau) + b_mu S(tau)],  mu = x, y
/// C = cosh(w tau), S = sinh(w tau)/w for omega_sq = w^2 > 0,
/// C = cos(v tau),  S = sin(v tau)/v  for omega_sq = -v^2 < 0.
/// amp = hypot(a, b/|omega|), phase = atan2(b/|omega|, a), both at tau = 0.
struct OpenSystemFit {
  double lambda_s = 0.0;
  double omega_sq = 0.0;
  double rho_z_inf = 0.0;
  double amp_x = 0.0, amp_y = 0.0;
  double phase_x = 0.0, phase_y = 0.0;
  double t_star = 0.0;
  double residual = 0.0;        // joint RMS over rho_x and rho_y samples in the tail
  double other_residual = 0.0;  // best RMS of the rejected damping branch
  Classification classification = Classification::Inconclusive;

  /// Evaluates the fitted model.
  BlochVector predict(double t) const;

  /// angular frequency |Im omega| (0 unless omega_sq < 0)
  double oscillation_frequency() const;
};

struct TStarOptions {
  double r2_threshold = 0.999;
  double min_window_fraction = 0.25;  // candidate windows keep at least this share of the span
};

/// Time of the first envelope point from which log|rho_x| on the remaining
/// envelope points is linear with R^2 > threshold. Envelope points are local
/// maxima of |rho_x| when there are at least three, all samples otherwise. Falls back to the best-R^2
/// candidate when no candidate reaches the threshold.
/// Throws InsufficientDecay when the envelope never falls e^2 below its maximum.
double select_tstar(const BlochTrajectory& traj, const TStarOptions& opt = {});

/// [t_star, t_end]: t_end is the time of the smallest envelope point after
/// the maximum when the envelope rises again afterwards (revivals), the last
/// sample otherwise. t_star is selected on envelope points up to t_end.
struct FitWindow {
  double t_star = 0.0;
  double t_end = 0.0;
};

FitWindow select_window(const BlochTrajectory& traj, const TStarOptions& opt = {});

/// Samples with t <= t_end.
BlochTrajectory restrict_to(const BlochTrajectory& traj, double t_end);

struct FitOptions {
  int multistarts = 8;
  int max_iterations = 500;
  double step_tolerance = 1e-10;
  double ambiguity = 0.05;  // relative residual gap below which the branch choice is refused
  std::size_t min_samples = 50;
};

/// Variable projection over (lambda_s, |omega|) for each damping branch with
/// Levenberg-Marquardt on the outer parameters; amplitudes by linear least
/// squares. rho_z(inf) is the mean of rho_z over the final quarter of the tail.
/// The classification uses azimuth_period over the whole input trajectory.
/// Throws WindowTooShort (fewer than min_samples after t_star), FitDiverged,
/// AmbiguousBranch.
OpenSystemFit fit_open_system(const BlochTrajectory& traj, double t_star, const FitOptions& opt = {});

/// Fits samples in [window.t_star, window.t_end].
OpenSystemFit fit_open_system(const BlochTrajectory& traj, const FitWindow& window, const FitOptions& opt = {});

struct PeriodicityOptions {
  double min_peak = 0.3;        // normalised autocorrelation at the peak
  double min_prominence = 0.3;  // peak minus the preceding trough
  double min_amplitude = 1e-3;  // rms of the detrended series; smaller wiggles are not a period
};

/// Dominant period of a uniformly sampled series (linear trend removed) from
/// the first autocorrelation peak; nullopt when none qualifies or the
/// detrended series is flatter than min_amplitude.
std::optional<double> detect_periodicity(const std::vector<double>& series, double dt,
                                         const PeriodicityOptions& opt = {});

/// Period of the azimuth, detected on cos(phi) = rho_x / |rho_perp| so that a
/// uniform rotation (linear unwrapped phi) counts as periodic and a settling
/// direction does not.
std::optional<double> azimuth_period(const BlochTrajectory& traj, const PeriodicityOptions& opt = {});

/// Paramagnetic iff omega_sq < 0 and a period within `tolerance` of
/// 2 pi / |Im omega| was detected; Ordered iff omega_sq > 0 and no period;
/// Inconclusive otherwise.
Classification classify_phase(const OpenSystemFit& fit, std::optional<double> period, double tolerance = 0.1);

}  // namespace qp
