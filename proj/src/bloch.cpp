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

#include "quenchphase/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quenchphase/errors.hpp"

namespace qp {

double BlochVector::purity() const {
  return std::sqrt(rho_x * rho_x + rho_y * rho_y + rho_z * rho_z);
}

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "grid dt must be > 0");
  if (!(t_max > dt) || !std::isfinite(t_max)) fail(ErrorCode::InvalidArgument, "grid t_max must exceed dt");
}

std::size_t TimeGrid::size() const {
  return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

std::vector<double> TimeGrid::points() const {
  validate();
  std::vector<double> t(size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

void BlochTrajectory::validate() const {
  if (times.size() != states.size()) {
    fail(ErrorCode::DimensionMismatch, "trajectory times/states length differ");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i == 0 ? times[0] < 0.0 : times[i] <= times[i - 1]) {
      fail(ErrorCode::InvalidArgument, "trajectory times must be strictly increasing from t >= 0");
    }
    if (states[i].purity() > 1.0 + 1e-9) {
      fail(ErrorCode::InvalidArgument, "purity exceeds 1 at sample " + std::to_string(i));
    }
  }
}

bool is_uniform(const std::vector<double>& times) {
  if (times.size() < 3) return true;
  const double dt = times[1] - times[0];
  for (std::size_t i = 2; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)) + 1e-12 * times[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace qp
