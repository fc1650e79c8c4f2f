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

#include "quenchphase/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "quenchphase/errors.hpp"

namespace qp {

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Ordered: return "Ordered";
    case Classification::Paramagnetic: return "Paramagnetic";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

enum class Branch { Overdamped, Oscillatory };

// (C, S) of the model at tau for rate w >= 0.
std::pair<double, double> cs(Branch b, double w, double tau) {
  if (w < 1e-9) return {1.0, tau};
  if (b == Branch::Overdamped) return {std::cosh(w * tau), std::sinh(w * tau) / w};
  return {std::cos(w * tau), std::sin(w * tau) / w};
}

struct Tail {
  Eigen::VectorXd tau;
  Eigen::MatrixXd y;  // columns rho_x, rho_y
};

struct Projection {
  double cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd resid;
  Eigen::Matrix2d coef;  // rows (a, b), columns (x, y)
};

Projection project(const Tail& d, Branch b, double lambda_s, double w) {
  const Eigen::Index n = d.tau.size();
  Eigen::MatrixXd phi(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [c, s] = cs(b, w, d.tau(i));
    const double e = std::exp(-lambda_s * d.tau(i));
    phi(i, 0) = e * c;
    phi(i, 1) = e * s;
  }
  Projection p;
  if (!phi.allFinite()) return p;
  p.coef = phi.colPivHouseholderQr().solve(d.y);
  const Eigen::MatrixXd r = d.y - phi * p.coef;
  p.resid = Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
  p.cost = p.resid.squaredNorm();
  if (!std::isfinite(p.cost)) p.cost = std::numeric_limits<double>::infinity();
  return p;
}

struct BranchFit {
  Branch branch = Branch::Overdamped;
  double lambda_s = 0.0;
  double w = 0.0;
  Projection proj;
};

// Levenberg-Marquardt on (lambda_s, w), w kept as |q|.
BranchFit levenberg_marquardt(const Tail& d, Branch b, double lambda0, double w0, const FitOptions& opt) {
  Eigen::Vector2d p(lambda0, w0);
  Projection cur = project(d, b, p(0), std::abs(p(1)));
  double mu = 1e-3;
  for (int it = 0; it < opt.max_iterations && std::isfinite(cur.cost); ++it) {
    Eigen::MatrixXd jac(cur.resid.size(), 2);
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(p(k)));
      Eigen::Vector2d hi = p, lo = p;
      hi(k) += h;
      lo(k) -= h;
      const auto ph = project(d, b, hi(0), std::abs(hi(1)));
      const auto pl = project(d, b, lo(0), std::abs(lo(1)));
      if (!std::isfinite(ph.cost) || !std::isfinite(pl.cost)) {
        ok = false;
        break;
      }
      jac.col(k) = (ph.resid - pl.resid) / (2 * h);
    }
    if (!ok) break;
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d g = jac.transpose() * cur.resid;
    bool accepted = false;
    Eigen::Vector2d step = Eigen::Vector2d::Zero();
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::Matrix2d m = jtj;
      m.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
      step = -m.ldlt().solve(g);
      if (!step.allFinite()) break;
      const Eigen::Vector2d trial = p + step;
      auto next = project(d, b, trial(0), std::abs(trial(1)));
      if (next.cost < cur.cost) {
        p = trial;
        cur = std::move(next);
        mu = std::max(mu / 10, 1e-12);
        accepted = true;
      } else {
        mu *= 10;
      }
    }
    if (!accepted || step.norm() < opt.step_tolerance * (p.norm() + opt.step_tolerance)) break;
  }
  return {b, p(0), std::abs(p(1)), std::move(cur)};
}

}  // namespace

BlochVector OpenSystemFit::predict(double t) const {
  const double tau = t - t_star;
  const Branch b = omega_sq < 0 ? Branch::Oscillatory : Branch::Overdamped;
  const double w = std::sqrt(std::abs(omega_sq));
  const auto [c, s] = cs(b, w, tau);
  const double e = std::exp(-lambda_s * tau);
  // amp cos(phase) = a, amp sin(phase) = b / w
  const double ws = w < 1e-9 ? 1.0 : w;
  auto comp = [&](double amp, double ph) { return e * (amp * std::cos(ph) * c + amp * std::sin(ph) * ws * s); };
  return {comp(amp_x, phase_x), comp(amp_y, phase_y), rho_z_inf};
}

double OpenSystemFit::oscillation_frequency() const { return omega_sq < 0 ? std::sqrt(-omega_sq) : 0.0; }

FitWindow select_window(const BlochTrajectory& traj, const TStarOptions& opt) {
  traj.validate();
  const std::size_t n = traj.size();
  if (n < 8) fail(ErrorCode::InsufficientDecay, "trajectory too short to select t*");
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(traj.states[i].rho_x);

  std::vector<std::size_t> pts;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (a[i] > a[i - 1] && a[i] >= a[i + 1]) pts.push_back(i);
  if (pts.size() < 3) {
    pts.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] > 0.0) pts.push_back(i);
  }
  // decay is judged on the envelope, so zeros of an oscillation do not count
  if (pts.empty()) fail(ErrorCode::InsufficientDecay, "rho_x vanishes identically");
  std::size_t top = 0;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (a[pts[k]] > a[pts[top]]) top = k;
  std::size_t bottom = top;
  for (std::size_t k = top; k < pts.size(); ++k)
    if (a[pts[k]] < a[pts[bottom]]) bottom = k;
  if (a[pts[bottom]] > std::exp(-2.0) * a[pts[top]])
    fail(ErrorCode::InsufficientDecay, "|rho_x| does not drop by e^2 from its maximum");

  FitWindow win;
  win.t_end = bottom + 1 == pts.size() ? traj.times.back() : traj.times[pts[bottom]];
  pts.resize(bottom + 1);

  // suffix sums for the regression of log a on t
  const std::size_t m = pts.size();
  std::vector<std::array<double, 5>> suf(m + 1, {0, 0, 0, 0, 0});
  for (std::size_t k = m; k-- > 0;) {
    const double t = traj.times[pts[k]], y = std::log(a[pts[k]]);
    suf[k] = {suf[k + 1][0] + t, suf[k + 1][1] + y, suf[k + 1][2] + t * t, suf[k + 1][3] + t * y,
              suf[k + 1][4] + y * y};
  }
  const double span = win.t_end - traj.times.front();
  double best_r2 = -std::numeric_limits<double>::infinity();
  win.t_star = traj.times.front();
  for (std::size_t k = 0; k + 3 <= m; ++k) {
    if (win.t_end - traj.times[pts[k]] < opt.min_window_fraction * span) break;
    const double c = double(m - k);
    const auto& s = suf[k];
    const double sxx = s[2] - s[0] * s[0] / c, sxy = s[3] - s[0] * s[1] / c, syy = s[4] - s[1] * s[1] / c;
    const double r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 0.0;
    const double t = traj.times[pts[k]];
    if (r2 > opt.r2_threshold) {
      win.t_star = t;
      return win;
    }
    if (r2 > best_r2) {
      best_r2 = r2;
      win.t_star = t;
    }
  }
  return win;
}

double select_tstar(const BlochTrajectory& traj, const TStarOptions& opt) { return select_window(traj, opt).t_star; }

BlochTrajectory restrict_to(const BlochTrajectory& traj, double t_end) {
  BlochTrajectory out;
  for (std::size_t i = 0; i < traj.size() && traj.times[i] <= t_end; ++i) {
    out.times.push_back(traj.times[i]);
    out.states.push_back(traj.states[i]);
  }
  return out;
}

std::optional<double> detect_periodicity(const std::vector<double>& series, double dt, const PeriodicityOptions& opt) {
  const std::size_t n = series.size();
  if (n < 20 || !(dt > 0)) return std::nullopt;
  // remove the least-squares line
  const double tm = 0.5 * double(n - 1);
  double ym = 0, sty = 0, stt = 0;
  for (double v : series) ym += v;
  ym /= double(n);
  for (std::size_t i = 0; i < n; ++i) {
    sty += (double(i) - tm) * (series[i] - ym);
    stt += (double(i) - tm) * (double(i) - tm);
  }
  const double slope = sty / stt;
  Eigen::VectorXd x(n);
  for (std::size_t i = 0; i < n; ++i) x(i) = series[i] - ym - slope * (double(i) - tm);
  const double var = x.squaredNorm();
  if (!(std::sqrt(var / double(n)) >= opt.min_amplitude) || var == 0.0) return std::nullopt;

  const std::size_t max_lag = n / 2;
  Eigen::VectorXd acf(max_lag + 1);
  for (std::size_t l = 0; l <= max_lag; ++l)
    acf(l) = x.head(n - l).dot(x.tail(n - l)) / var;
  double trough = acf(0);
  for (std::size_t l = 1; l < max_lag; ++l) {
    trough = std::min(trough, acf(l));
    if (!(acf(l) >= acf(l - 1) && acf(l) > acf(l + 1))) continue;
    if (acf(l) < opt.min_peak || acf(l) - trough < opt.min_prominence) continue;
    const double ym1 = acf(l - 1), y0 = acf(l), yp1 = acf(l + 1);
    const double den = ym1 - 2 * y0 + yp1;
    const double shift = den != 0.0 ? 0.5 * (ym1 - yp1) / den : 0.0;
    return (double(l) + shift) * dt;
  }
  return std::nullopt;
}

std::optional<double> azimuth_period(const BlochTrajectory& traj, const PeriodicityOptions& opt) {
  if (traj.size() < 20 || !is_uniform(traj.times)) return std::nullopt;
  std::vector<double> c(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    const double r = std::hypot(s.rho_x, s.rho_y);
    c[i] = r > 0 ? s.rho_x / r : (i ? c[i - 1] : 1.0);
  }
  return detect_periodicity(c, traj.times[1] - traj.times[0], opt);
}

Classification classify_phase(const OpenSystemFit& fit, std::optional<double> period, double tolerance) {
  if (fit.omega_sq < 0 && period) {
    const double expect = 2 * std::numbers::pi / fit.oscillation_frequency();
    if (std::abs(*period - expect) <= tolerance * expect) return Classification::Paramagnetic;
    return Classification::Inconclusive;
  }
  if (fit.omega_sq > 0 && !period) return Classification::Ordered;
  return Classification::Inconclusive;
}

OpenSystemFit fit_open_system(const BlochTrajectory& traj, const FitWindow& window, const FitOptions& opt) {
  return fit_open_system(restrict_to(traj, window.t_end), window.t_star, opt);
}

OpenSystemFit fit_open_system(const BlochTrajectory& traj, double t_star, const FitOptions& opt) {
  traj.validate();
  if (traj.size() == 0 || t_star < traj.times.front() || t_star > traj.times.back())
    fail(ErrorCode::InvalidArgument, "t_star outside the trajectory");
  const auto first = std::size_t(std::lower_bound(traj.times.begin(), traj.times.end(), t_star) - traj.times.begin());
  const std::size_t n = traj.size() - first;
  if (n < opt.min_samples)
    fail(ErrorCode::WindowTooShort, "only " + std::to_string(n) + " samples after t_star");

  Tail d;
  d.tau.resize(Eigen::Index(n));
  d.y.resize(Eigen::Index(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    d.tau(Eigen::Index(i)) = traj.times[first + i] - t_star;
    d.y(Eigen::Index(i), 0) = traj.states[first + i].rho_x;
    d.y(Eigen::Index(i), 1) = traj.states[first + i].rho_y;
  }
  double zsum = 0.0;
  const std::size_t q0 = n - std::max<std::size_t>(1, n / 4);
  for (std::size_t i = q0; i < n; ++i) zsum += traj.states[first + i].rho_z;

  // envelope rate from log |rho_perp|, frequency from rho_x
  double lambda0 = 0.1;
  {
    double st = 0, sy = 0, stt = 0, sty = 0, c = 0;
    for (Eigen::Index i = 0; i < d.tau.size(); ++i) {
      const double r = d.y.row(i).norm();
      if (!(r > 0)) continue;
      const double y = std::log(r), t = d.tau(i);
      st += t, sy += y, stt += t * t, sty += t * y, c += 1;
    }
    const double den = c * stt - st * st;
    if (c > 2 && den > 0) lambda0 = std::max(1e-3, -(c * sty - st * sy) / den);
  }
  // dominant angular frequency of (rho_x, rho_y); 0 for a monotone tail
  double nu0 = 0.0;
  {
    const double span = d.tau(Eigen::Index(n - 1));
    const double dt = d.tau(1) - d.tau(0);
    const double dw = std::numbers::pi / (2.0 * span);
    const int count = int(std::min(std::numbers::pi / dt, 50.0) / dw);
    double best = -1.0;
    for (int k = 0; k <= count; ++k) {
      const double w = k * dw;
      std::complex<double> zx = 0.0, zy = 0.0;
      for (Eigen::Index i = 0; i < d.tau.size(); ++i) {
        const std::complex<double> e = std::polar(1.0, w * d.tau(i));
        zx += d.y(i, 0) * e;
        zy += d.y(i, 1) * e;
      }
      const double pw = std::norm(zx) + std::norm(zy);
      if (pw > best) {
        best = pw;
        nu0 = w;
      }
    }
  }
  if (nu0 < 1e-3) nu0 = lambda0;

  static constexpr std::array<double, 8> kOsc{1.0, 0.5, 1.5, 2.0, 0.75, 1.25, 3.0, 0.25};
  static constexpr std::array<double, 8> kOver{1.0, 0.1, 0.5, 2.0, 4.0, 0.25, 0.75, 1.5};
  BranchFit best[2];
  for (int b = 0; b < 2; ++b) {
    const Branch br = b == 0 ? Branch::Overdamped : Branch::Oscillatory;
    for (int s = 0; s < std::min<int>(opt.multistarts, 8); ++s) {
      const double w0 = br == Branch::Oscillatory ? nu0 * kOsc[std::size_t(s)] : lambda0 * kOver[std::size_t(s)];
      const double l0 = br == Branch::Oscillatory ? lambda0 : lambda0 + w0;
      auto f = levenberg_marquardt(d, br, l0, w0, opt);
      if (f.proj.cost < best[b].proj.cost) best[b] = std::move(f);
    }
  }
  const double r_over = std::sqrt(best[0].proj.cost / double(2 * n));
  const double r_osc = std::sqrt(best[1].proj.cost / double(2 * n));
  if (!std::isfinite(r_over) && !std::isfinite(r_osc)) fail(ErrorCode::FitDiverged, "no multistart converged");
  if (std::abs(r_over - r_osc) < opt.ambiguity * std::max(r_over, r_osc))
    fail(ErrorCode::AmbiguousBranch, "damping branches fit equally well (rms " + std::to_string(r_over) + " vs " +
                                         std::to_string(r_osc) + ")");
  const int win = r_osc < r_over ? 1 : 0;
  const BranchFit& f = best[win];

  OpenSystemFit out;
  out.lambda_s = f.lambda_s;
  out.omega_sq = f.branch == Branch::Oscillatory ? -f.w * f.w : f.w * f.w;
  out.rho_z_inf = zsum / double(n - q0);
  const double ws = f.w < 1e-9 ? 1.0 : f.w;
  out.amp_x = std::hypot(f.proj.coef(0, 0), f.proj.coef(1, 0) / ws);
  out.phase_x = std::atan2(f.proj.coef(1, 0) / ws, f.proj.coef(0, 0));
  out.amp_y = std::hypot(f.proj.coef(0, 1), f.proj.coef(1, 1) / ws);
  out.phase_y = std::atan2(f.proj.coef(1, 1) / ws, f.proj.coef(0, 1));
  out.t_star = t_star;
  out.residual = win ? r_osc : r_over;
  out.other_residual = win ? r_over : r_osc;

  // the azimuth period uses every sample up to the window end: a short
  // transient does not move it, and the extra span makes room for the lag
  const auto period = azimuth_period(traj);
  out.classification = classify_phase(out, period);
  return out;
}

}  // namespace qp
