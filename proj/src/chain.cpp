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

#include "quenchphase/chain.hpp"

#include <cmath>

#include "quenchphase/errors.hpp"

namespace qp {

void ChainParams::validate() const {
  for (double v : {gamma_x, gamma_y, delta, h}) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite chain parameter");
  }
  const int min_n = delta != 0.0 ? 3 : 2;
  if (n < min_n) {
    fail(ErrorCode::InvalidArgument, "chain length " + std::to_string(n) + " below minimum " + std::to_string(min_n));
  }
}

void QuenchSpec::validate() const {
  pre.validate();
  post.validate();
  if (pre.n != post.n || pre.boundary != post.boundary) {
    fail(ErrorCode::InvalidArgument, "pre and post chains must share n and boundary");
  }
  if (!std::isfinite(relative_phase)) fail(ErrorCode::InvalidArgument, "non-finite relative phase");
}

std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "open"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic" || s == "Periodic") return Boundary::Periodic;
  if (s == "open" || s == "Open") return Boundary::Open;
  fail(ErrorCode::ConfigError, "unknown boundary '" + s + "'");
}

std::string to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::Mixed: return "mixed";
  }
  return "mixed";
}

}  // namespace qp
