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

#include <cstddef>
#include <vector>

namespace qp {

struct BlochVector {
  double rho_x = 0.0;
  double rho_y = 0.0;
  double rho_z = 0.0;

  double purity() const;
};

/// Uniform grid t_k = k*dt, k = 0..floor(t_max/dt + 1e-9).
struct TimeGrid {
  double dt = 0.01;
  double t_max = 50.0;

  void validate() const;
  std::size_t size() const;
  std::vector<double> points() const;
};

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;

  std::size_t size() const { return times.size(); }
  /// Throws InvalidArgument if times are not strictly increasing from t >= 0,
  /// lengths differ, or any state has purity > 1 + 1e-9.
  void validate() const;
};

/// Returns true when the grid spacing is uniform to relative 1e-9.
bool is_uniform(const std::vector<double>& times);

}  // namespace qp
