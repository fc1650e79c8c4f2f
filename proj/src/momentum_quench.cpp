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

#include "quenchphase/momentum_quench.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "quenchphase/errors.hpp"
#include "quenchphase/pfaffian.hpp"

namespace qp::ff {
namespace {

using cd = std::complex<double>;
constexpr double kMinU = 1e-7;

// With a_j = N^{-1/2} sum_k e^{ikj} a_k the sector Hamiltonian is
// sum_k [xi_k n_k - i eta_k (a+_k a+_{-k} + a_k a_{-k})] - N h.
double xi(const ChainParams& p, double k) {
  return 2.0 * (p.h - (p.gamma_x + p.gamma_y) * std::cos(k) - p.delta * std::cos(2.0 * k));
}
double eta(const ChainParams& p, double k) {
  return (p.gamma_x - p.gamma_y) * std::sin(k) + p.delta * std::sin(2.0 * k);
}

// Amplitudes of (|0>, a+_k a+_{-k}|0>).
struct Pair {
  double k;
  cd u, v;
};

// Lowest eigenvector of [[0, 2i eta], [-2i eta, 2 xi]].
Pair ground_pair(const ChainParams& p, double k) {
  const double x = xi(p, k);
  const double e = eta(p, k);
  const double eps = std::hypot(x, 2.0 * e);
  const double a = x + eps;
  const double nrm = std::hypot(a, 2.0 * e);
  if (nrm == 0.0) return {k, 0.0, 1.0};
  return {k, a / nrm, cd(0.0, 2.0 * e / nrm)};
}

// exp(-i h2 t) with h2 = xi I + B, B^2 = eps^2 I.
Pair evolve_pair(const ChainParams& p, const Pair& s, double t) {
  const double x = xi(p, s.k);
  const double e = eta(p, s.k);
  const double eps = std::hypot(x, 2.0 * e);
  const double c = std::cos(eps * t);
  const double sn = eps == 0.0 ? t : std::sin(eps * t) / eps;
  const cd i1(0, 1);
  // B = [[-xi, 2i eta], [-2i eta, xi]]
  const cd bu = -x * s.u + 2.0 * i1 * e * s.v;
  const cd bv = -2.0 * i1 * e * s.u + x * s.v;
  const cd ph = std::polar(1.0, -x * t);
  return {s.k, ph * (c * s.u - i1 * sn * bu), ph * (c * s.v - i1 * sn * bv)};
}

struct SectorPairs {
  std::vector<Pair> pairs;
  bool has_unpaired = false;
  double k_unpaired = 0.0;
};

// Thouless matrix Z_ij = (2i/N) sum_k (v_k/u_k) sin(k (i - j)).
Eigen::MatrixXcd thouless(const std::vector<Pair>& pairs, int n) {
  std::vector<cd> z(2 * n - 1, 0.0);
  for (const Pair& p : pairs) {
    const cd r = p.v / p.u;
    for (int d = -(n - 1); d <= n - 1; ++d) z[d + n - 1] += r * std::sin(p.k * d);
  }
  const cd f(0.0, 2.0 / n);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = f * z[i - j + n - 1];
  return m;
}

struct Amplitudes {
  cd f, g;
  double z_even, z_odd;
};

class MomentumKernel {
 public:
  explicit MomentumKernel(const QuenchSpec& q) : post_(q.post), n_(q.pre.n) {
    const int half = n_ / 2;
    for (int m = 0; m < half; ++m) {
      even_.pairs.push_back(ground_pair(q.pre, (2.0 * m + 1.0) * std::numbers::pi / n_));
    }
    for (int m = 1; m < half; ++m) odd_.pairs.push_back(ground_pair(q.pre, 2.0 * std::numbers::pi * m / n_));
    const double x0 = xi(q.pre, 0.0);
    const double xpi = xi(q.pre, std::numbers::pi);
    double soft = std::numeric_limits<double>::infinity();
    for (int m = 1; m < half; ++m) {
      const double k = 2.0 * std::numbers::pi * m / n_;
      soft = std::min(soft, std::hypot(xi(q.pre, k), 2.0 * eta(q.pre, k)));
    }
    const double single = std::min(x0, xpi);
    const double broken = std::min(0.0, x0 + xpi) + soft;
    if (broken < single - 1e-12) {
      fail(ErrorCode::SectorCollapse, "odd ground state breaks a momentum pair");
    }
    odd_.has_unpaired = true;
    odd_.k_unpaired = x0 <= xpi ? 0.0 : std::numbers::pi;
    for (const auto* s : {&even_, &odd_})
      for (const Pair& p : s->pairs)
        if (std::abs(p.u) < kMinU) fail(ErrorCode::SectorCollapse, "fully occupied pair");
  }

  Amplitudes at(double t) const {
    SectorPairs e = even_;
    SectorPairs o = odd_;
    double sum_e = 0.0;
    double sum_o = 0.0;
    double log_c = 0.0;
    cd phase_c = 1.0;
    for (Pair& p : e.pairs) {
      p = evolve_pair(post_, p, t);
      if (std::abs(p.u) < kMinU) fail(ErrorCode::SectorCollapse, "fully occupied pair");
      sum_e += std::norm(p.v);
      log_c += std::log(std::abs(p.u));
      phase_c *= std::conj(p.u) / std::abs(p.u);
    }
    for (Pair& p : o.pairs) {
      p = evolve_pair(post_, p, t);
      if (std::abs(p.u) < kMinU) fail(ErrorCode::SectorCollapse, "fully occupied pair");
      sum_o += std::norm(p.v);
      log_c += std::log(std::abs(p.u));
      phase_c *= p.u / std::abs(p.u);
    }
    const cd unpaired_phase = std::polar(1.0, -xi(post_, o.k_unpaired) * t);

    const Eigen::MatrixXcd z = thouless(o.pairs, n_);
    const Eigen::MatrixXcd y = thouless(e.pairs, n_).conjugate();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n_, n_);
    const Eigen::MatrixXcd yz = y * z;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu((id - yz).transpose());
    // Row 0 of G = I + Z X Y and of Y G = Y + Y Z X Y, X = (I - YZ)^{-1}.
    const Eigen::VectorXcd s1 = lu.solve(z.row(0).transpose());
    const Eigen::VectorXcd s2 = lu.solve(yz.row(0).transpose());
    Eigen::VectorXcd g0 = y.transpose() * s1;
    g0(0) += 1.0;
    const Eigen::VectorXcd yg0 = y.row(0).transpose() + y.transpose() * s2;

    Eigen::VectorXcd w(n_);
    for (int j = 0; j < n_; ++j) w(j) = std::polar(1.0 / std::sqrt(double(n_)), o.k_unpaired * j);
    const cd sx = (w.array() * (g0 + yg0).array()).sum();
    const cd sy = cd(0, -1) * (w.array() * (g0 - yg0).array()).sum();

    Eigen::MatrixXcd blk(2 * n_, 2 * n_);
    blk << z, -id, id, -y;
    const LogPfaffian ov = log_pfaffian(blk);
    const cd pre = phase_c * ov.phase * unpaired_phase * std::exp(log_c + ov.log_abs);

    Amplitudes a;
    a.f = pre * sx;
    a.g = pre * sy;
    a.z_even = 1.0 - 4.0 * sum_e / n_;
    a.z_odd = 1.0 - 2.0 * (1.0 + 2.0 * sum_o) / n_;
    return a;
  }

 private:
  ChainParams post_;
  int n_;
  SectorPairs even_;
  SectorPairs odd_;
};

}  // namespace

bool momentum_path_applicable(const QuenchSpec& q) {
  return q.pre.boundary == Boundary::Periodic && q.pre.n % 2 == 0 && q.pre.n >= 4;
}

BlochTrajectory momentum_quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times) {
  q.validate();
  if (!momentum_path_applicable(q)) fail(ErrorCode::InvalidArgument, "momentum path needs a periodic chain with even n >= 4");
  if (site < 0 || site >= q.pre.n) fail(ErrorCode::IndexOutOfRange, "site out of range");
  const MomentumKernel kernel(q);
  const cd f0 = kernel.at(0.0).f;
  if (std::abs(f0) < 1e-12) fail(ErrorCode::SectorCollapse, "vanishing cross-sector matrix element");
  const cd gauge = std::abs(f0) / f0 * std::polar(1.0, q.relative_phase);

  BlochTrajectory traj;
  traj.times = times;
  traj.states.resize(times.size());
  const auto nt = static_cast<std::int64_t>(times.size());
  bool collapsed = false;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < nt; ++k) {
    try {
      const Amplitudes a = kernel.at(times[k]);
      traj.states[k] = {(gauge * a.f).real(), (gauge * a.g).real(), 0.5 * (a.z_even + a.z_odd)};
    } catch (const Error&) {
#pragma omp atomic write
      collapsed = true;
    }
  }
  if (collapsed) fail(ErrorCode::SectorCollapse, "momentum pair representation degenerated");
  return traj;
}

}  // namespace qp::ff
