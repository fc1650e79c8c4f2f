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

#include "quenchphase/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "quenchphase/ed.hpp"
#include "quenchphase/errors.hpp"
#include "quenchphase/freefermion.hpp"

namespace qp {

using nlohmann::json;

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::ED: return "ed";
    case Backend::FreeFermion: return "free_fermion";
    case Backend::Lindblad: return "lindblad";
  }
  return "?";
}

Backend backend_from_string(std::string_view s) {
  if (s == "ed") return Backend::ED;
  if (s == "free_fermion" || s == "freefermion" || s == "ff") return Backend::FreeFermion;
  if (s == "lindblad") return Backend::Lindblad;
  fail(ErrorCode::ConfigError, "unknown backend '" + std::string(s) + "'");
}

TableFormat format_from_string(std::string_view s) {
  if (s == "csv") return TableFormat::Csv;
  if (s == "json") return TableFormat::Json;
  fail(ErrorCode::ConfigError, "unknown format '" + std::string(s) + "'");
}

int ExperimentConfig::resolved_site() const { return site >= 0 ? site : quench.pre.n / 2; }

void ExperimentConfig::validate() const {
  try {
    grid.validate();
    if (backend == Backend::Lindblad) {
      lindblad.validate();
      if (initial.purity() > 1.0 + 1e-12) fail(ErrorCode::ConfigError, "initial Bloch vector outside the ball");
      return;
    }
    quench.validate();
    if (quench.pre.n != quench.post.n || quench.pre.boundary != quench.post.boundary)
      fail(ErrorCode::ConfigError, "quench may not change n or the boundary");
    const int s = resolved_site();
    if (s < 0 || s >= quench.pre.n) fail(ErrorCode::ConfigError, "site outside the chain");
    if (backend == Backend::ED && quench.pre.n > ed::kDefaultMaxSites)
      fail(ErrorCode::ConfigError, "ED backend is limited to n <= " + std::to_string(ed::kDefaultMaxSites));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, e.what());
  }
}

namespace {

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(ErrorCode::ParseError, std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail(ErrorCode::ConfigError, "unknown key '" + k + "' in " + std::string(where));
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_chain(const json& j, std::string_view where, ChainParams& p) {
  check_keys(j, where, {"n", "boundary", "gamma_x", "gamma_y", "delta", "h"});
  read(j, "n", p.n);
  read(j, "gamma_x", p.gamma_x);
  read(j, "gamma_y", p.gamma_y);
  read(j, "delta", p.delta);
  read(j, "h", p.h);
  if (j.contains("boundary")) {
    std::string b;
    read(j, "boundary", b);
    p.boundary = boundary_from_string(b);
  }
}

json chain_json(const ChainParams& p) {
  return {{"n", p.n}, {"boundary", std::string(to_string(p.boundary))}, {"gamma_x", p.gamma_x},
          {"gamma_y", p.gamma_y}, {"delta", p.delta}, {"h", p.h}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config", {"backend", "chain", "quench", "lindblad", "grid", "site", "superposition_phase", "output", "sweep"});
  ExperimentConfig c;
  std::string backend = "free_fermion";
  read(j, "backend", backend);
  c.backend = backend_from_string(backend);

  const bool chain_backend = c.backend != Backend::Lindblad;
  if (chain_backend) {
    if (!j.contains("chain")) fail(ErrorCode::ConfigError, "backend " + backend + " needs a 'chain' block");
    if (!j.contains("quench")) fail(ErrorCode::ConfigError, "backend " + backend + " needs a 'quench' block");
    if (j.contains("lindblad")) fail(ErrorCode::ConfigError, "'lindblad' block given for a chain backend");
    read_chain(j.at("chain"), "chain", c.quench.pre);
    c.quench.post = c.quench.pre;
    // the quench block overrides post-quench couplings only
    check_keys(j.at("quench"), "quench", {"gamma_x", "gamma_y", "delta", "h"});
    read_chain(j.at("quench"), "quench", c.quench.post);
    read(j, "superposition_phase", c.quench.relative_phase);
    read(j, "site", c.site);
  } else {
    if (!j.contains("lindblad")) fail(ErrorCode::ConfigError, "backend lindblad needs a 'lindblad' block");
    for (const char* k : {"chain", "quench", "site", "superposition_phase"})
      if (j.contains(k)) fail(ErrorCode::ConfigError, std::string("'") + k + "' given for the lindblad backend");
    const json& l = j.at("lindblad");
    check_keys(l, "lindblad", {"h_x", "h_y", "h_z", "alpha", "beta", "delta", "lambda_x", "lambda_y", "lambda_z", "initial"});
    read(l, "h_x", c.lindblad.h_x);
    read(l, "h_y", c.lindblad.h_y);
    read(l, "h_z", c.lindblad.h_z);
    read(l, "alpha", c.lindblad.alpha);
    read(l, "beta", c.lindblad.beta);
    read(l, "delta", c.lindblad.delta);
    read(l, "lambda_x", c.lindblad.lambda_x);
    read(l, "lambda_y", c.lindblad.lambda_y);
    read(l, "lambda_z", c.lindblad.lambda_z);
    if (!l.contains("initial")) fail(ErrorCode::ConfigError, "lindblad block needs 'initial': [rho_x, rho_y, rho_z]");
    std::vector<double> v;
    read(l, "initial", v);
    if (v.size() != 3) fail(ErrorCode::ConfigError, "'initial' must have three components");
    c.initial = {v[0], v[1], v[2]};
  }
  if (j.contains("grid")) {
    check_keys(j.at("grid"), "grid", {"t_max", "dt"});
    read(j.at("grid"), "t_max", c.grid.t_max);
    read(j.at("grid"), "dt", c.grid.dt);
  }
  if (j.contains("output")) {
    check_keys(j.at("output"), "output", {"path", "format"});
    read(j.at("output"), "path", c.output.path);
    std::string f = "csv";
    read(j.at("output"), "format", f);
    c.output.format = format_from_string(f);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, "config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["backend"] = std::string(to_string(c.backend));
  if (c.backend == Backend::Lindblad) {
    const auto& l = c.lindblad;
    j["lindblad"] = {{"h_x", l.h_x}, {"h_y", l.h_y}, {"h_z", l.h_z}, {"alpha", l.alpha}, {"beta", l.beta},
                     {"delta", l.delta}, {"lambda_x", l.lambda_x}, {"lambda_y", l.lambda_y},
                     {"lambda_z", l.lambda_z}, {"initial", {c.initial.rho_x, c.initial.rho_y, c.initial.rho_z}}};
  } else {
    j["chain"] = chain_json(c.quench.pre);
    const auto& q = c.quench.post;
    j["quench"] = {{"gamma_x", q.gamma_x}, {"gamma_y", q.gamma_y}, {"delta", q.delta}, {"h", q.h}};
    j["site"] = c.resolved_site();
    j["superposition_phase"] = c.quench.relative_phase;
  }
  j["grid"] = {{"t_max", c.grid.t_max}, {"dt", c.grid.dt}};
  j["output"] = {{"path", c.output.path}, {"format", c.output.format == TableFormat::Csv ? "csv" : "json"}};
  return j;
}

BlochTrajectory simulate(const ExperimentConfig& c) {
  c.validate();
  const auto times = c.grid.points();
  switch (c.backend) {
    case Backend::ED:
      return ed::quench_trajectory(c.quench, c.resolved_site(), times);
    case Backend::FreeFermion:
      return ff::quench_trajectory(c.quench, c.resolved_site(), times);
    case Backend::Lindblad:
      if (parity_constrained(c.lindblad)) return evolve_analytic(c.lindblad, c.initial, times);
      return evolve_numeric(c.lindblad, c.initial, c.grid, 4);
  }
  fail(ErrorCode::InvalidArgument, "unknown backend");
}

namespace {

double pick_t_star(const BlochTrajectory& traj) {
  try {
    return select_window(traj).t_star;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientDecay) throw;
    return traj.times.front();
  }
}

void print_row(std::ostream& os, std::initializer_list<double> vals) {
  char buf[32];
  bool first = true;
  for (double v : vals) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) os << ',';
    os << buf;
    first = false;
  }
  os << '\n';
}

}  // namespace

QuenchResult run_quench(const ExperimentConfig& c) {
  QuenchResult r;
  r.trajectory = simulate(c);
  r.angles = to_angles(r.trajectory);
  r.phases = geometric_phase(r.angles, pick_t_star(r.trajectory));
  return r;
}

void write_quench_table(std::ostream& os, const QuenchResult& r, TableFormat f) {
  const auto& tr = r.trajectory;
  const auto& a = r.angles;
  const auto& p = r.phases;
  if (f == TableFormat::Csv) {
    os << "t,rho_x,rho_y,rho_z,r,theta,phi,phi_total,phi_dynamic,phi_geometric\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const auto& s = tr.states[i];
      print_row(os, {tr.times[i], s.rho_x, s.rho_y, s.rho_z, a.r[i], a.theta[i], a.phi[i], p.phi_total[i],
                     p.phi_dynamic[i], p.phi_geometric[i]});
    }
    return;
  }
  json rows = json::array();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& s = tr.states[i];
    rows.push_back({{"t", tr.times[i]}, {"rho_x", s.rho_x}, {"rho_y", s.rho_y}, {"rho_z", s.rho_z},
                    {"r", a.r[i]}, {"theta", a.theta[i]}, {"phi", a.phi[i]}, {"phi_total", p.phi_total[i]},
                    {"phi_dynamic", p.phi_dynamic[i]}, {"phi_geometric", p.phi_geometric[i]}});
  }
  os << json{{"t_star", p.t_star}, {"samples", rows}}.dump(1) << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v))
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

BlochTrajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') break;
  }
  const auto header = split_csv(line);
  int col[4];
  const char* names[4] = {"t", "rho_x", "rho_y", "rho_z"};
  for (int k = 0; k < 4; ++k) {
    const auto it = std::find(header.begin(), header.end(), names[k]);
    if (it == header.end()) fail(ErrorCode::ParseError, std::string("missing column '") + names[k] + "'");
    col[k] = static_cast<int>(it - header.begin());
  }
  BlochTrajectory traj;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                                      " fields, got " + std::to_string(cells.size()));
    traj.times.push_back(parse_number(cells[col[0]], lineno));
    traj.states.push_back({parse_number(cells[col[1]], lineno), parse_number(cells[col[2]], lineno),
                           parse_number(cells[col[3]], lineno)});
  }
  try {
    traj.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  return traj;
}

BlochTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_trajectory_csv(in);
}

FitReport run_fit(const BlochTrajectory& traj) {
  traj.validate();
  if (traj.size() < FitOptions{}.min_samples)
    fail(ErrorCode::InsufficientDecay, "trajectory has " + std::to_string(traj.size()) + " samples");
  if (!is_uniform(traj.times)) fail(ErrorCode::ParseError, "time grid is not uniform");

  FitReport rep;
  rep.window = select_window(traj);
  rep.fit = fit_open_system(traj, rep.window);
  rep.period = azimuth_period(traj);
  rep.coefficients = asymptotic_coefficients(traj.states.front().purity(), rep.fit.rho_z_inf);

  const auto angles = to_angles(traj);
  const auto rec = geometric_phase(angles, rep.window.t_star);
  const TimeWindow late{0.5 * (rep.window.t_star + rep.window.t_end), rep.window.t_end};
  try {
    rep.slope = asymptotic_prediction_check(rec, rep.coefficients, angles, late);
  } catch (const Error& e) {
    rep.slope_note = e.what();
  }
  return rep;
}

json to_json(const FitReport& r) {
  const auto& f = r.fit;
  json j{{"t_star", r.window.t_star},
         {"t_end", r.window.t_end},
         {"lambda_s", f.lambda_s},
         {"omega_sq", f.omega_sq},
         {"rho_z_inf", f.rho_z_inf},
         {"amp_x", f.amp_x},
         {"amp_y", f.amp_y},
         {"phase_x", f.phase_x},
         {"phase_y", f.phase_y},
         {"residual", f.residual},
         {"other_branch_residual", f.other_residual},
         {"classification", std::string(to_string(f.classification))},
         {"period", r.period ? json(*r.period) : json(nullptr)},
         {"coefficients", {{"s", r.coefficients.s}, {"r0", r.coefficients.r0}, {"r_inf", r.coefficients.r_inf},
                           {"c", r.coefficients.c}, {"k", r.coefficients.k}}}};
  if (r.slope) {
    const auto& s = *r.slope;
    // on the null branch the prediction is the residual, not the slope
    j["slope_check"] = {{"null_branch", s.null_branch}, {"samples", s.samples}, {"slope", s.slope},
                        {"expected", s.null_branch ? json(nullptr) : json(s.expected)},
                        {"relative_error", s.null_branch ? json(nullptr) : json(s.relative_error)},
                        {"max_residual", s.null_branch ? json(s.max_residual) : json(nullptr)}};
  } else {
    j["slope_check"] = {{"skipped", r.slope_note}};
  }
  return j;
}

SweepAxis parse_sweep(const json& j) {
  check_keys(j, "sweep", {"parameter", "values", "start", "stop", "count"});
  SweepAxis a;
  read(j, "parameter", a.parameter);
  static const std::set<std::string> known{"h", "gamma_x", "gamma_y", "delta"};
  if (!known.count(a.parameter)) fail(ErrorCode::ConfigError, "sweep parameter must be h, gamma_x, gamma_y or delta");
  if (j.contains("values")) {
    if (j.contains("start") || j.contains("stop") || j.contains("count"))
      fail(ErrorCode::ConfigError, "sweep takes either 'values' or start/stop/count");
    read(j, "values", a.values);
  } else {
    double start = 0, stop = 0;
    int count = 0;
    read(j, "start", start);
    read(j, "stop", stop);
    read(j, "count", count);
    for (int i = 0; i < count; ++i) a.values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  }
  if (a.values.size() < 2) fail(ErrorCode::ConfigError, "a sweep needs at least two values");
  return a;
}

namespace {

void set_post(ExperimentConfig& c, const std::string& name, double v) {
  auto& p = c.quench.post;
  if (name == "h") p.h = v;
  else if (name == "gamma_x") p.gamma_x = v;
  else if (name == "gamma_y") p.gamma_y = v;
  else if (name == "delta") p.delta = v;
  else fail(ErrorCode::ConfigError, "unknown sweep parameter '" + name + "'");
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& c, const SweepAxis& axis, int workers) {
  if (c.backend == Backend::Lindblad) fail(ErrorCode::ConfigError, "sweeps need a chain backend");
  if (axis.values.size() < 2) fail(ErrorCode::ConfigError, "a sweep needs at least two values");
  if (workers < 1) fail(ErrorCode::ConfigError, "workers must be positive");
  std::vector<SweepRow> rows(axis.values.size());
  const int n = static_cast<int>(rows.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    SweepRow& row = rows[i];
    row.value = axis.values[i];
    try {
      ExperimentConfig ci = c;
      set_post(ci, axis.parameter, row.value);
      ci.validate();
      const auto rep = run_fit(simulate(ci));
      row.omega_sq = rep.fit.omega_sq;
      row.period = rep.period;
      row.classification = rep.fit.classification;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

void write_sweep_table(std::ostream& os, const SweepAxis& axis, const std::vector<SweepRow>& rows, TableFormat f) {
  if (f == TableFormat::Json) {
    json arr = json::array();
    for (const auto& r : rows) {
      json o{{axis.parameter, r.value}, {"ok", r.ok}};
      if (r.ok) {
        o["omega_sq"] = r.omega_sq;
        o["period"] = r.period ? json(*r.period) : json(nullptr);
        o["classification"] = std::string(to_string(r.classification));
      } else {
        o["error"] = r.error;
      }
      arr.push_back(o);
    }
    os << arr.dump(1) << '\n';
    return;
  }
  os << axis.parameter << ",omega_sq,period,classification,error\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    os << buf << ',';
    if (r.ok) {
      std::snprintf(buf, sizeof buf, "%.17g", r.omega_sq);
      os << buf << ',';
      if (r.period) {
        std::snprintf(buf, sizeof buf, "%.17g", *r.period);
        os << buf;
      }
      os << ',' << to_string(r.classification) << ",\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      os << ",,," << msg << '\n';
    }
  }
}

CompareReport compare_trajectories(const BlochTrajectory& a, const BlochTrajectory& b, double threshold) {
  if (a.size() != b.size()) fail(ErrorCode::GridMismatch, "trajectories have different lengths");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
      fail(ErrorCode::GridMismatch, "time grids differ at sample " + std::to_string(i));
  }
  const auto pa = to_angles(a);
  const auto pb = to_angles(b);
  CompareReport r;
  r.threshold = threshold;
  r.times = a.times;
  r.phi = pa.phi;
  r.phi_reference = pb.phi;
  r.abs_dphi.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.abs_dphi[i] = std::abs(pa.phi[i] - pb.phi[i]);
    r.max_abs_dphi = std::max(r.max_abs_dphi, r.abs_dphi[i]);
    if (!r.onset && r.abs_dphi[i] > threshold) r.onset = a.times[i];
  }
  return r;
}

CompareReport run_compare(const ExperimentConfig& c, const ExperimentConfig& reference, double threshold,
                          int workers) {
  if (workers < 1) fail(ErrorCode::ConfigError, "workers must be positive");
  BlochTrajectory ta, tb;
  std::exception_ptr err[2];
#pragma omp parallel for num_threads(std::min(workers, 2)) schedule(static, 1)
  for (int k = 0; k < 2; ++k) {
    try {
      (k == 0 ? ta : tb) = simulate(k == 0 ? c : reference);
    } catch (...) {
      err[k] = std::current_exception();
    }
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return compare_trajectories(ta, tb, threshold);
}

void write_compare_table(std::ostream& os, const CompareReport& r, TableFormat f) {
  if (f == TableFormat::Json) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.times.size(); ++i)
      rows.push_back({{"t", r.times[i]}, {"phi", r.phi[i]}, {"phi_reference", r.phi_reference[i]},
                      {"abs_dphi", r.abs_dphi[i]}});
    os << json{{"threshold", r.threshold}, {"onset", r.onset ? json(*r.onset) : json(nullptr)},
               {"max_abs_dphi", r.max_abs_dphi}, {"samples", rows}}
              .dump(1)
       << '\n';
    return;
  }
  os << "t,phi,phi_reference,abs_dphi\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) print_row(os, {r.times[i], r.phi[i], r.phi_reference[i], r.abs_dphi[i]});
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::GridMismatch:
      return 2;
    case ErrorCode::InsufficientDecay:
    case ErrorCode::WindowTooShort:
      return 4;
    default:
      return 3;
  }
}

}  // namespace qp
