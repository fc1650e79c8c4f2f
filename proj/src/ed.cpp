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

#include "quenchphase/ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "quenchphase/errors.hpp"

namespace qp::ed {
namespace {

using cd = std::complex<double>;

struct Pair {
  std::uint64_t mask;
  int a, b;
};
struct Cluster {
  std::uint64_t mask;
  int centre;
};

// Off-diagonal structure of H, precomputed once per call.
struct Terms {
  int n;
  double gx, gy, delta, h;
  std::vector<Pair> bonds;
  std::vector<Cluster> clusters;

  explicit Terms(const ChainParams& p) : n(p.n), gx(p.gamma_x), gy(p.gamma_y), delta(p.delta), h(p.h) {
    const bool periodic = p.boundary == Boundary::Periodic;
    const int nb = periodic ? n : n - 1;
    for (int i = 0; i < nb; ++i) {
      const int j = (i + 1) % n;
      bonds.push_back({(1ULL << i) | (1ULL << j), i, j});
    }
    if (delta != 0.0) {
      for (int i = periodic ? 0 : 1; i < (periodic ? n : n - 1); ++i) {
        const int l = (i - 1 + n) % n;
        const int r = (i + 1) % n;
        clusters.push_back({(1ULL << l) | (1ULL << r), i});
      }
    }
  }

  double diag(std::uint64_t s) const { return -h * (n - 2.0 * std::popcount(s)); }

  // H[s ^ mask, s] for a bond; symmetric in s <-> s ^ mask.
  double bond(std::uint64_t s, const Pair& b) const {
    const bool same = ((s >> b.a) & 1ULL) == ((s >> b.b) & 1ULL);
    return -gx - gy * (same ? -1.0 : 1.0);
  }

  double cluster(std::uint64_t s, const Cluster& c) const {
    return -delta * (((s >> c.centre) & 1ULL) ? -1.0 : 1.0);
  }
};

void check_dim(const ChainParams& p, Eigen::Index dim) {
  p.validate();
  if (p.n > 62) fail(ErrorCode::InvalidArgument, "chain too long for a bit basis");
  if (dim != (Eigen::Index(1) << p.n)) {
    fail(ErrorCode::DimensionMismatch, "state dimension does not match 2^n");
  }
}

template <typename Vec>
Vec apply_gather(const ChainParams& p, const Vec& v) {
  check_dim(p, v.size());
  const Terms t(p);
  const std::int64_t dim = v.size();
  Vec out(dim);
#pragma omp parallel for schedule(static) if (dim >= 4096)
  for (std::int64_t i = 0; i < dim; ++i) {
    const auto s = static_cast<std::uint64_t>(i);
    typename Vec::Scalar acc = t.diag(s) * v(i);
    for (const Pair& b : t.bonds) acc += t.bond(s, b) * v(static_cast<std::int64_t>(s ^ b.mask));
    for (const Cluster& c : t.clusters) acc += t.cluster(s, c) * v(static_cast<std::int64_t>(s ^ c.mask));
    out(i) = acc;
  }
  return out;
}


}  // namespace

Parity parity_of_index(std::uint64_t s) { return std::popcount(s) % 2 == 0 ? Parity::Even : Parity::Odd; }

void ManyBodyState::validate() const {
  if (amplitudes.size() != (Eigen::Index(1) << n)) fail(ErrorCode::DimensionMismatch, "state size != 2^n");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) fail(ErrorCode::InvalidArgument, "state not normalised");
  if (parity == Parity::Mixed) return;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    if (parity_of_index(static_cast<std::uint64_t>(i)) != parity && std::abs(amplitudes(i)) > 1e-10) {
      fail(ErrorCode::ParityMismatch, "amplitude outside declared parity sector");
    }
  }
}

Eigen::VectorXcd apply_hamiltonian(const ChainParams& p, const Eigen::VectorXcd& v) { return apply_gather(p, v); }
Eigen::VectorXd apply_hamiltonian(const ChainParams& p, const Eigen::VectorXd& v) { return apply_gather(p, v); }

Eigen::VectorXcd apply_hamiltonian_serial(const ChainParams& p, const Eigen::VectorXcd& v) {
  check_dim(p, v.size());
  const Terms t(p);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(v.size()); ++s) {
    const cd x = v(static_cast<Eigen::Index>(s));
    out(static_cast<Eigen::Index>(s)) += t.diag(s) * x;
    for (const Pair& b : t.bonds) out(static_cast<Eigen::Index>(s ^ b.mask)) += t.bond(s, b) * x;
    for (const Cluster& c : t.clusters) out(static_cast<Eigen::Index>(s ^ c.mask)) += t.cluster(s, c) * x;
  }
  return out;
}

std::vector<std::uint64_t> sector_states(int n, Parity sector) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 0; s < (1ULL << n); ++s) {
    if (sector == Parity::Mixed || parity_of_index(s) == sector) out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd sector_matrix(const ChainParams& p, Parity sector) {
  p.validate();
  const Terms t(p);
  const auto states = sector_states(p.n, sector);
  std::vector<Eigen::Index> index(std::size_t(1) << p.n, -1);
  for (std::size_t k = 0; k < states.size(); ++k) index[states[k]] = static_cast<Eigen::Index>(k);
  const auto d = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const std::uint64_t s = states[k];
    m(k, k) += t.diag(s);
    for (const Pair& b : t.bonds) m(index[s ^ b.mask], k) += t.bond(s, b);
    for (const Cluster& c : t.clusters) m(index[s ^ c.mask], k) += t.cluster(s, c);
  }
  return m;
}

namespace {

struct Eigenpair {
  double value;
  Eigen::VectorXd vector;
};

Eigenpair lanczos_lowest(const ChainParams& p, Eigen::VectorXd start, const LanczosOptions& opt) {
  const Eigen::Index dim = start.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, dim));
  start.normalize();
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    Eigen::MatrixXd v(dim, m + 1);
    Eigen::VectorXd alpha(m), beta(m);
    v.col(0) = start;
    int k = 0;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = apply_hamiltonian(p, Eigen::VectorXd(v.col(j)));
      alpha(j) = v.col(j).dot(w);
      for (int pass = 0; pass < 2; ++pass) {
        w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
      }
      beta(j) = w.norm();
      k = j + 1;
      if (beta(j) < 1e-13 * std::max(1.0, std::abs(alpha(j)))) {
        breakdown = true;
        break;
      }
      v.col(j + 1) = w / beta(j);
    }
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
      tri(j, j) = alpha(j);
      if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double theta = es.eigenvalues()(0);
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    Eigen::VectorXd x = v.leftCols(k) * y;
    x.normalize();
    const double resid = breakdown ? 0.0 : std::abs(beta(k - 1) * y(k - 1));
    if (resid < opt.tol * std::max(1.0, std::abs(theta))) {
      // Rayleigh quotient of the normalised Ritz vector.
      const double e = x.dot(apply_hamiltonian(p, x));
      return {e, x};
    }
    start = x;
  }
  fail(ErrorCode::NoConvergence, "Lanczos did not converge");
}

ManyBodyState real_state(int n, const Eigen::VectorXd& v, Parity parity) {
  ManyBodyState s;
  s.n = n;
  s.amplitudes = v.cast<cd>();
  s.parity = parity;
  return s;
}

}  // namespace

SectorGroundStates ground_state_sectors(const ChainParams& p, int gauge_site, const LanczosOptions& opt) {
  p.validate();
  if (p.n > opt.max_sites) {
    fail(ErrorCode::InvalidArgument, "n = " + std::to_string(p.n) + " exceeds the ED cap " + std::to_string(opt.max_sites));
  }
  if (gauge_site < 0 || gauge_site >= p.n) fail(ErrorCode::IndexOutOfRange, "gauge site out of range");
  const Eigen::Index dim = Eigen::Index(1) << p.n;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  SectorGroundStates out;
  for (Parity sector : {Parity::Even, Parity::Odd}) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double r = g(rng);
      if (parity_of_index(static_cast<std::uint64_t>(i)) == sector) start(i) = r;
    }
    Eigenpair ep = lanczos_lowest(p, start, opt);
    Eigen::Index imax;
    ep.vector.cwiseAbs().maxCoeff(&imax);
    if (ep.vector(imax) < 0) ep.vector = -ep.vector;
    if (sector == Parity::Even) {
      out.e_even = ep.value;
      out.even = real_state(p.n, ep.vector, sector);
    } else {
      out.e_odd = ep.value;
      out.odd = real_state(p.n, ep.vector, sector);
    }
  }
  const std::uint64_t mask = 1ULL << gauge_site;
  double f = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    f += out.even.amplitudes(static_cast<Eigen::Index>(static_cast<std::uint64_t>(i) ^ mask)).real() *
         out.odd.amplitudes(i).real();
  }
  if (f < 0.0) out.odd.amplitudes = -out.odd.amplitudes;
  return out;
}

SectorGroundStates ground_state_sectors(const ChainParams& p) { return ground_state_sectors(p, p.n / 2); }

bool sectors_degenerate(const SectorGroundStates& gs) {
  return std::abs(gs.e_even - gs.e_odd) < 1e-10 * std::max(1.0, std::abs(gs.e_even));
}

ManyBodyState symmetry_broken_state(const ManyBodyState& e, const ManyBodyState& o, double phase) {
  if (e.parity != Parity::Even || o.parity != Parity::Odd) {
    fail(ErrorCode::ParityMismatch, "symmetry_broken_state needs an even and an odd state");
  }
  if (e.n != o.n) fail(ErrorCode::DimensionMismatch, "sector states of different length");
  e.validate();
  o.validate();
  ManyBodyState s;
  s.n = e.n;
  s.parity = Parity::Mixed;
  s.amplitudes = (e.amplitudes + std::polar(1.0, phase) * o.amplitudes) / std::sqrt(2.0);
  return s;
}

BlochVector single_spin_bloch(const ManyBodyState& s, int site) {
  if (site < 0 || site >= s.n) fail(ErrorCode::IndexOutOfRange, "site out of range");
  if (s.amplitudes.size() != (Eigen::Index(1) << s.n)) fail(ErrorCode::DimensionMismatch, "state size != 2^n");
  const std::uint64_t mask = 1ULL << site;
  cd x = 0.0;
  cd y = 0.0;
  double z = 0.0;
  const auto& a = s.amplitudes;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const bool down = (u & mask) != 0;
    const cd partner = std::conj(a(static_cast<Eigen::Index>(u ^ mask)));
    x += partner * a(i);
    y += partner * (down ? cd(0, -1) : cd(0, 1)) * a(i);
    z += (down ? -1.0 : 1.0) * std::norm(a(i));
  }
  return {x.real(), y.real(), z};
}

double energy(const ChainParams& p, const ManyBodyState& s) {
  return s.amplitudes.dot(apply_hamiltonian(p, s.amplitudes)).real();
}

Propagator::Propagator(const ChainParams& post, int dense_limit, int max_sites) : p_(post) {
  p_.validate();
  if (p_.n > max_sites) fail(ErrorCode::InvalidArgument, "n exceeds the ED cap");
  dense_ = (std::size_t(1) << (p_.n - 1)) <= static_cast<std::size_t>(dense_limit);
  if (!dense_) return;
  for (int k = 0; k < 2; ++k) {
    const Parity sector = k == 0 ? Parity::Even : Parity::Odd;
    Sector& sec = sectors_[k];
    sec.states = sector_states(p_.n, sector);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector_matrix(p_, sector));
    sec.values = es.eigenvalues();
    sec.vectors = es.eigenvectors();
  }
}

Eigen::VectorXcd Propagator::krylov_step(const Eigen::VectorXcd& v0, double t) const {
  constexpr int kDim = 30;
  constexpr double kTol = 1e-10;
  Eigen::VectorXcd v = v0;
  const Eigen::Index dim = v.size();
  double done = 0.0;
  while (done < t) {
    const double nrm = v.norm();
    if (nrm == 0.0) return v;
    const int m = static_cast<int>(std::min<Eigen::Index>(kDim, dim));
    Eigen::MatrixXcd basis(dim, m + 1);
    Eigen::VectorXd alpha(m), beta(m);
    basis.col(0) = v / nrm;
    int k = 0;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd w = apply_hamiltonian(p_, Eigen::VectorXcd(basis.col(j)));
      alpha(j) = basis.col(j).dot(w).real();
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      }
      beta(j) = w.norm();
      k = j + 1;
      if (beta(j) < 1e-13 * std::max(1.0, std::abs(alpha(j)))) {
        breakdown = true;
        break;
      }
      basis.col(j + 1) = w / beta(j);
    }
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
      tri(j, j) = alpha(j);
      if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd q0 = q.row(0).transpose();
    auto coeffs = [&](double tau) {
      Eigen::VectorXcd c(k);
      for (int j = 0; j < k; ++j) c(j) = std::polar(1.0, -es.eigenvalues()(j) * tau) * q0(j);
      return Eigen::VectorXcd(q.cast<cd>() * c);
    };
    double tau = t - done;
    Eigen::VectorXcd c = coeffs(tau);
    while (!breakdown && beta(k - 1) * std::abs(c(k - 1)) * nrm > kTol) {
      tau *= 0.5;
      c = coeffs(tau);
    }
    v = nrm * (basis.leftCols(k) * c);
    done += tau;
  }
  return v;
}

ManyBodyState Propagator::evolve(const ManyBodyState& s, double t) const {
  if (s.n != p_.n) fail(ErrorCode::DimensionMismatch, "state length differs from propagator chain");
  if (s.amplitudes.size() != (Eigen::Index(1) << s.n)) fail(ErrorCode::DimensionMismatch, "state size != 2^n");
  ManyBodyState out = s;
  if (t == 0.0) return out;
  if (!dense_) {
    out.amplitudes = krylov_step(s.amplitudes, t);
    return out;
  }
  for (const Sector& sec : sectors_) {
    const auto d = static_cast<Eigen::Index>(sec.states.size());
    Eigen::VectorXcd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = s.amplitudes(static_cast<Eigen::Index>(sec.states[i]));
    Eigen::VectorXcd c = sec.vectors.transpose().cast<cd>() * x;
    for (Eigen::Index i = 0; i < d; ++i) c(i) *= std::polar(1.0, -sec.values(i) * t);
    x = sec.vectors.cast<cd>() * c;
    for (Eigen::Index i = 0; i < d; ++i) out.amplitudes(static_cast<Eigen::Index>(sec.states[i])) = x(i);
  }
  return out;
}

BlochTrajectory Propagator::trajectory(const ManyBodyState& s, const std::vector<double>& times, int site) const {
  BlochTrajectory traj;
  traj.times = times;
  traj.states.reserve(times.size());
  ManyBodyState cur = s;
  double t_cur = 0.0;
  for (double t : times) {
    if (dense_) {
      cur = evolve(s, t);
    } else {
      cur = evolve(cur, t - t_cur);
      t_cur = t;
    }
    traj.states.push_back(single_spin_bloch(cur, site));
  }
  return traj;
}

ManyBodyState evolve_state(const ManyBodyState& s, const ChainParams& post, double t) {
  return Propagator(post).evolve(s, t);
}

BlochTrajectory quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times) {
  q.validate();
  const SectorGroundStates gs = ground_state_sectors(q.pre, site);
  const ManyBodyState broken = symmetry_broken_state(gs.even, gs.odd, q.relative_phase);
  return Propagator(q.post).trajectory(broken, times, site);
}

}  // namespace qp::ed
