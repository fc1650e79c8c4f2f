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

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quenchphase/bloch.hpp"
#include "quenchphase/chain.hpp"

namespace qp::ff {

/// Majoranas c_{2j} = S_j X_j, c_{2j+1} = S_j Y_j with S_j = prod_{l<j} Z_l.
/// The chain Hamiltonian restricted to a parity sector is H = (i/4) c^T A c
/// with A real antisymmetric. Terms crossing the periodic boundary carry the
/// factor -P, so Even <-> antiperiodic and Odd <-> periodic fermions.
struct BdgModel {
  int n = 0;
  Parity sector = Parity::Even;
  Eigen::MatrixXd a;
};

BdgModel jordan_wigner_bdg(const ChainParams& p, Parity sector);

/// beta = W c with W A W^T = diag-blocks [[0, e_k], [-e_k, 0]], e_k >= 0
/// ascending, so H = sum_k e_k (n_k - 1/2).
struct Modes {
  Eigen::VectorXd energies;
  Eigen::MatrixXd w;
  bool degenerate = false;  // some adjacent energies closer than 1e-12
};

Modes diagonalize_bdg(const BdgModel& m);

/// Majorana correlations Gamma_ab = -(i/4) <[c_a, c_b]>, so <c_a c_b> =
/// delta_ab + 2i Gamma_ab and the spin-up state has blocks [[0, 1/2], [-1/2, 0]].
struct CovarianceMatrix {
  Eigen::MatrixXd gamma;

  /// Antisymmetry within 1e-10 and |nu| <= 1/2 + 1e-9.
  void validate() const;
};

/// Vacuum of all modes.
CovarianceMatrix ground_covariance(const Modes& modes);

/// +1 or -1: fermion parity prod_j Z_j of the mode vacuum (equals det W).
int vacuum_parity(const Modes& modes);

struct SectorGround {
  double energy = 0.0;
  CovarianceMatrix cov;
};

/// Lowest state of the sector Hamiltonian with fermion parity equal to the
/// sector; occupies the softest mode when the vacuum has the wrong parity.
SectorGround sector_ground_state(const ChainParams& p, Parity sector);

/// O(t) = exp(A t): Heisenberg evolution c(t) = O(t) c.
Eigen::MatrixXd orthogonal_evolution(const Modes& modes, double t);

CovarianceMatrix evolve_covariance(const CovarianceMatrix& g, const Modes& post, double t);

double sigma_z_expectation(const CovarianceMatrix& g, int site);

/// Pre-quench sector ground states and post-quench modes for one quench.
/// Sector weights: |psi> = cos(chi)|e> + sin(chi) e^{i phase}|o>.
struct CrossSectorState {
  int n = 0;
  Boundary boundary = Boundary::Periodic;
  int site = 0;    // measured site
  int origin = 0;  // JW string starts here (site for periodic chains, 0 for open)
  double relative_phase = 0.0;
  double chi = 0.78539816339744830962;
  Eigen::MatrixXd m_even;  // 2 * Gamma of |e>
  Eigen::MatrixXd m_odd;   // 2 * Gamma of |o>
  Modes post_even;
  Modes post_odd;
  Eigen::MatrixXd a_post_even;
  Eigen::MatrixXd a_post_odd;
};

CrossSectorState make_cross_sector_state(const QuenchSpec& q, int site);

/// (<sigma_x(t)>, <sigma_y(t)>) from the cross-sector matrix elements
/// <e|e^{iH t} sigma e^{-iH t}|o>, evaluated with a Pfaffian of the
/// generalised Wick contraction relative to the pair (e, sigma_x|o>).
/// The o-sector phase is fixed by <e|sigma_x(site)|o> >= 0 at t = 0.
/// Throws SectorCollapse when that overlap vanishes.
std::pair<double, double> sigma_xy_expectation(const CrossSectorState& cs, int site, double t);

BlochVector bloch_vector(const CrossSectorState& cs, double t);

/// Real-space reference trajectory (any boundary).
BlochTrajectory quench_trajectory_reference(const QuenchSpec& q, int site, const std::vector<double>& times);

/// Uses the momentum-space fast path for periodic chains with even n when it
/// applies, the real-space reference otherwise.
BlochTrajectory quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times);

}  // namespace qp::ff
