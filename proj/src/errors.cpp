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

#include "quenchphase/errors.hpp"

namespace qp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OmegaDegenerate: return "OmegaDegenerate";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ParityMismatch: return "ParityMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::NotAntisymmetric: return "NotAntisymmetric";
    case ErrorCode::SectorCollapse: return "SectorCollapse";
    case ErrorCode::PurityVanished: return "PurityVanished";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::InsufficientDecay: return "InsufficientDecay";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::AmbiguousBranch: return "AmbiguousBranch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace qp
