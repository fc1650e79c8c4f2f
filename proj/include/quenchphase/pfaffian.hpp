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

#include <Eigen/Dense>

namespace qp {

/// Pf(A) of a real or complex antisymmetric matrix by Parlett-Reid
/// tridiagonalization with partial pivoting, O(n^3).
/// Throws OddDimension / NotAntisymmetric (tolerance 1e-10 relative to max|A|).
double pfaffian(const Eigen::MatrixXd& a);
std::complex<double> pfaffian(const Eigen::MatrixXcd& a);

/// Pf(A) = phase * exp(log_abs); avoids overflow for large n.
/// phase is zero (and log_abs = -inf) for singular input.
struct LogPfaffian {
  std::complex<double> phase;
  double log_abs;
};
LogPfaffian log_pfaffian(const Eigen::MatrixXcd& a);

/// Skips the antisymmetry check; caller guarantees the structure.
std::complex<double> pfaffian_unchecked(Eigen::MatrixXcd a);

}  // namespace qp
