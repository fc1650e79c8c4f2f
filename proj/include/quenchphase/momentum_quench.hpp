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

#include "quenchphase/bloch.hpp"
#include "quenchphase/chain.hpp"

namespace qp::ff {

/// Periodic chain with even n: both sectors decouple into (k, -k) pairs.
bool momentum_path_applicable(const QuenchSpec& q);

/// Same observable as quench_trajectory_reference, computed from the
/// momentum-space pair states (Thouless form), parallel over time points.
/// Throws SectorCollapse when the pair representation degenerates; callers
/// fall back to the real-space path.
BlochTrajectory momentum_quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times);

}  // namespace qp::ff
