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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quenchphase/bloch.hpp"
#include "quenchphase/chain.hpp"

namespace qp::ed {

/// Basis: bit j of the index is site j, bit value 0 is spin up (Z = +1).
inline constexpr int kDefaultMaxSites = 14;

struct ManyBodyState {
  int n = 0;
  Eigen::VectorXcd amplitudes;
  Parity parity = Parity::Mixed;

  /// Norm within 1e-10 and declared parity support.
  void validate() const;
};

Parity parity_of_index(std::uint64_t s);

/// H v, matrix-free; OpenMP-parallel over output amplitudes (gather form).
Eigen::VectorXcd apply_hamiltonian(const ChainParams& p, const Eigen::VectorXcd& v);
Eigen::VectorXd apply_hamiltonian(const ChainParams& p, const Eigen::VectorXd& v);

/// Serial scatter-form reference of the same operator; used by tests and the benchmark.
Eigen::VectorXcd apply_hamiltonian_serial(const ChainParams& p, const Eigen::VectorXcd& v);

/// Dense matrix of H restricted to basis states of the given parity, in
/// ascending index order (see sector_states).
Eigen::MatrixXd sector_matrix(const ChainParams& p, Parity sector);
std::vector<std::uint64_t> sector_states(int n, Parity sector);

struct SectorGroundStates {
  double e_even = 0.0;
  double e_odd = 0.0;
  ManyBodyState even;
  ManyBodyState odd;
};

struct LanczosOptions {
  int max_sites = kDefaultMaxSites;
  int krylov_dim = 120;
  int max_restarts = 50;
  double tol = 1e-12;
  std::uint64_t seed = 12345;
};

/// Lowest eigenpair per parity sector by restarted Lanczos (full
/// reorthogonalisation). Both vectors are real; the odd one is signed so that
/// <e|X_gauge_site|o> >= 0. Throws NoConvergence.
SectorGroundStates ground_state_sectors(const ChainParams& p, int gauge_site,
                                        const LanczosOptions& opt = {});
SectorGroundStates ground_state_sectors(const ChainParams& p);

bool sectors_degenerate(const SectorGroundStates& gs);

/// (|e> + e^{i phase}|o>)/sqrt(2). Throws ParityMismatch.
ManyBodyState symmetry_broken_state(const ManyBodyState& e, const ManyBodyState& o, double phase);

BlochVector single_spin_bloch(const ManyBodyState& s, int site);

double energy(const ChainParams& p, const ManyBodyState& s);

/// e^{-iHt}; dense per-sector eigendecomposition up to dense_limit basis
/// states per sector, Lanczos-Krylov stepping beyond.
class Propagator {
 public:
  explicit Propagator(const ChainParams& post, int dense_limit = 1024, int max_sites = kDefaultMaxSites);

  ManyBodyState evolve(const ManyBodyState& s, double t) const;

  /// Bloch vector of `site` on the time grid, stepping from sample to sample.
  BlochTrajectory trajectory(const ManyBodyState& s, const std::vector<double>& times, int site) const;

  bool dense() const { return dense_; }

 private:
  Eigen::VectorXcd krylov_step(const Eigen::VectorXcd& v, double t) const;

  ChainParams p_;
  bool dense_ = false;
  struct Sector {
    std::vector<std::uint64_t> states;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
  };
  Sector sectors_[2];
};

ManyBodyState evolve_state(const ManyBodyState& s, const ChainParams& post, double t);

/// Full pipeline: pre-quench sector ground states, broken state, evolution.
BlochTrajectory quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times);

}  // namespace qp::ed
