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

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quenchphase/bloch.hpp"
#include "quenchphase/chain.hpp"
#include "quenchphase/errors.hpp"
#include "quenchphase/fit.hpp"
#include "quenchphase/geometry.hpp"
#include "quenchphase/lindblad.hpp"

namespace qp {

enum class Backend { ED, FreeFermion, Lindblad };

std::string_view to_string(Backend b);
/// "ed", "free_fermion" (or "freefermion", "ff"), "lindblad"; ConfigError otherwise.
Backend backend_from_string(std::string_view s);

enum class TableFormat { Csv, Json };

TableFormat format_from_string(std::string_view s);

struct OutputSpec {
  std::string path;  // empty: standard output
  TableFormat format = TableFormat::Csv;
};

/// Defaults: site n/2, superposition phase 0, dt 0.01, t_max 50.
struct ExperimentConfig {
  Backend backend = Backend::FreeFermion;
  QuenchSpec quench;           // chain backends
  DissipatorParams lindblad;   // Lindblad backend
  BlochVector initial;         // Lindblad backend
  TimeGrid grid;
  int site = -1;               // -1: n/2
  OutputSpec output;

  int resolved_site() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Strict: unknown keys and missing backend blocks are ConfigError; wrong
/// types are ParseError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved config (defaults filled in) for the metadata sidecar.
nlohmann::json to_json(const ExperimentConfig& c);

struct QuenchResult {
  BlochTrajectory trajectory;
  BlochAngles angles;
  PhaseRecord phases;
};

/// Trajectory on the configured backend, angles and phases. t_star comes from
/// select_window when the trajectory decays enough, the first time otherwise.
QuenchResult run_quench(const ExperimentConfig& c);

BlochTrajectory simulate(const ExperimentConfig& c);

/// Columns t, rho_x, rho_y, rho_z, r, theta, phi, phi_total, phi_dynamic,
/// phi_geometric; 17 significant digits.
void write_quench_table(std::ostream& os, const QuenchResult& r, TableFormat f);

/// Reads t, rho_x, rho_y, rho_z (by header name; other columns ignored).
BlochTrajectory read_trajectory_csv(std::istream& is);
BlochTrajectory read_trajectory_csv(const std::string& path);

struct FitReport {
  FitWindow window;
  OpenSystemFit fit;
  std::optional<double> period;
  AsymptoticCoefficients coefficients;
  std::optional<SlopeReport> slope;  // late half of the fit window
  std::string slope_note;            // why the slope check was skipped
};

/// Throws InsufficientDecay for fewer than 50 samples or too little decay,
/// ParseError for a non-uniform grid.
FitReport run_fit(const BlochTrajectory& traj);
nlohmann::json to_json(const FitReport& r);

struct SweepAxis {
  std::string parameter;  // h, gamma_x, gamma_y or delta of the post-quench chain
  std::vector<double> values;
};

SweepAxis parse_sweep(const nlohmann::json& j);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  double omega_sq = 0.0;
  std::optional<double> period;
  Classification classification = Classification::Inconclusive;
  std::string error;
};

/// One independent quench + fit per value, up to `workers` at a time; rows in
/// axis order. Failures are recorded in their row.
std::vector<SweepRow> run_sweep(const ExperimentConfig& c, const SweepAxis& axis, int workers);
void write_sweep_table(std::ostream& os, const SweepAxis& axis, const std::vector<SweepRow>& rows, TableFormat f);

struct CompareReport {
  std::vector<double> times;
  std::vector<double> phi;
  std::vector<double> phi_reference;
  std::vector<double> abs_dphi;
  double threshold = 1e-3;
  std::optional<double> onset;  // first time |dphi| > threshold
  double max_abs_dphi = 0.0;
};

/// Both runs must share the time grid (GridMismatch otherwise).
CompareReport run_compare(const ExperimentConfig& c, const ExperimentConfig& reference, double threshold = 1e-3,
                          int workers = 2);
CompareReport compare_trajectories(const BlochTrajectory& a, const BlochTrajectory& b, double threshold = 1e-3);
void write_compare_table(std::ostream& os, const CompareReport& r, TableFormat f);

/// 0 success, 2 config or I/O, 3 numeric failure, 4 insufficient data.
int exit_code_for(ErrorCode code);

}  // namespace qp
