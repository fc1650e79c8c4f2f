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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quenchphase/experiment.hpp"

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  configuration, parse or I/O error (also mismatched compare grids)\n"
    "  3  numerical failure (fit diverged, ambiguous branch, ...)\n"
    "  4  insufficient data (too few samples, no decay, window too short)\n";

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) qp::fail(qp::ErrorCode::IoError, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    qp::fail(qp::ErrorCode::ParseError, path + ": " + e.what());
  }
}

struct Common {
  std::string config;
  std::string out;
  std::string backend;
  std::string format;
};

qp::ExperimentConfig resolve(const nlohmann::json& j, const Common& o) {
  nlohmann::json jj = j;
  if (!o.backend.empty()) jj["backend"] = o.backend;
  auto c = qp::parse_config(jj);
  if (!o.out.empty()) c.output.path = o.out;
  if (!o.format.empty()) c.output.format = qp::format_from_string(o.format);
  return c;
}

// Runs `write` against the configured path, or standard output when empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) qp::fail(qp::ErrorCode::IoError, "cannot write '" + path + "'");
  write(out);
  if (!out) qp::fail(qp::ErrorCode::IoError, "write failed for '" + path + "'");
}

void add_common(CLI::App* app, Common& o, bool with_config = true) {
  if (with_config) app->add_option("--config", o.config, "experiment config (JSON)")->required();
  app->add_option("--out", o.out, "output file (default: standard output)");
  app->add_option("--backend", o.backend, "override the backend: ed, free_fermion, lindblad");
  app->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench dynamics, Bloch-sphere phases and open-system fits of a single chain spin"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Common q;
  auto* quench = app.add_subcommand("quench", "simulate one quench and write the trajectory/phase table");
  add_common(quench, q);

  std::string fit_in, fit_out;
  auto* fit = app.add_subcommand("fit", "fit the open-system model to a trajectory table and classify the phase");
  fit->add_option("input", fit_in, "trajectory CSV with columns t, rho_x, rho_y, rho_z")->required();
  fit->add_option("--out", fit_out, "report file (default: standard output)");

  Common s;
  int workers = 1;
  auto* sweep = app.add_subcommand("sweep", "classify the phase across one post-quench parameter");
  add_common(sweep, s);
  sweep->add_option("--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);

  Common c;
  std::string reference;
  double threshold = 1e-3;
  int cmp_workers = 2;
  auto* compare = app.add_subcommand("compare", "pointwise azimuth difference between two runs");
  add_common(compare, c);
  compare->add_option("--reference", reference, "reference config (JSON)")->required();
  compare->add_option("--threshold", threshold, "onset threshold on |dphi|")->check(CLI::PositiveNumber);
  compare->add_option("--workers", cmp_workers, "concurrent runs (1 or 2)")->check(CLI::PositiveNumber);

  for (auto* sub : {quench, fit, sweep, compare}) sub->footer(kExitCodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*quench) {
      const auto cfg = resolve(read_json(q.config), q);
      const auto res = qp::run_quench(cfg);
      emit(cfg.output.path, [&](std::ostream& os) { qp::write_quench_table(os, res, cfg.output.format); });
      if (!cfg.output.path.empty()) {
        auto meta = qp::to_json(cfg);
        meta["t_star"] = res.phases.t_star;
        emit(cfg.output.path + ".meta.json", [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
      }
    } else if (*fit) {
      const auto rep = qp::run_fit(qp::read_trajectory_csv(fit_in));
      emit(fit_out, [&](std::ostream& os) { os << qp::to_json(rep).dump(2) << '\n'; });
    } else if (*sweep) {
      const auto j = read_json(s.config);
      if (!j.contains("sweep")) qp::fail(qp::ErrorCode::ConfigError, "config has no 'sweep' block");
      auto base = j;
      base.erase("sweep");
      const auto cfg = resolve(base, s);
      const auto axis = qp::parse_sweep(j.at("sweep"));
      const auto rows = qp::run_sweep(cfg, axis, workers);
      emit(cfg.output.path, [&](std::ostream& os) { qp::write_sweep_table(os, axis, rows, cfg.output.format); });
    } else if (*compare) {
      const auto cfg = resolve(read_json(c.config), c);
      Common ref_opts;
      ref_opts.backend = c.backend;
      const auto ref = resolve(read_json(reference), ref_opts);
      const auto rep = qp::run_compare(cfg, ref, threshold, cmp_workers);
      emit(cfg.output.path, [&](std::ostream& os) { qp::write_compare_table(os, rep, cfg.output.format); });
      std::cerr << "max |dphi| = " << rep.max_abs_dphi << ", onset = ";
      if (rep.onset) std::cerr << *rep.onset << '\n';
      else std::cerr << "none\n";
    }
  } catch (const qp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qp::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
