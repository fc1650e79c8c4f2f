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

#include <string>

namespace qp {

enum class Boundary { Periodic, Open };
enum class Parity { Even, Odd, Mixed };

/// H = -sum_i [gx X_i X_{i+1} + gy Y_i Y_{i+1} + delta X_{i-1} Z_i X_{i+1} + h Z_i].
/// Periodic chains wrap every term; open chains keep bonds (0..n-2) and
/// cluster centres (1..n-2).
struct ChainParams {
  double gamma_x = 0.0;
  double gamma_y = 0.0;
  double delta = 0.0;
  double h = 0.0;
  int n = 2;
  Boundary boundary = Boundary::Periodic;

  void validate() const;
};

struct QuenchSpec {
  ChainParams pre;
  ChainParams post;
  double relative_phase = 0.0;

  void validate() const;
};

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);
std::string to_string(Parity p);

}  // namespace qp
