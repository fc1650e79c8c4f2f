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

#include "quenchphase/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "quenchphase/errors.hpp"
#include "quenchphase/momentum_quench.hpp"
#include "quenchphase/pfaffian.hpp"

namespace qp::ff {
namespace {

using cd = std::complex<double>;

// Adds the bilinear i*w*c_a*c_b to H = (i/4) c^T A c.
void add_term(Eigen::MatrixXd& a, int i, int j, double w) {
  a(i, j) += 2.0 * w;
  a(j, i) -= 2.0 * w;
}

Eigen::MatrixXd majorana_symplectic(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    j(2 * k, 2 * k + 1) = 1.0;
    j(2 * k + 1, 2 * k) = -1.0;
  }
  return j;
}

}  // namespace

BdgModel jordan_wigner_bdg(const ChainParams& p, Parity sector) {
  p.validate();
  if (sector == Parity::Mixed) fail(ErrorCode::InvalidArgument, "BdG model needs a definite parity sector");
  const int n = p.n;
  BdgModel m;
  m.n = n;
  m.sector = sector;
  m.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const bool periodic = p.boundary == Boundary::Periodic;
  const double wrap = sector == Parity::Even ? -1.0 : 1.0;  // -P
  const int nb = periodic ? n : n - 1;
  for (int i = 0; i < nb; ++i) {
    const int j = (i + 1) % n;
    const double f = (i == n - 1) ? wrap : 1.0;
    add_term(m.a, 2 * i + 1, 2 * j, f * p.gamma_x);
    add_term(m.a, 2 * i, 2 * j + 1, -f * p.gamma_y);
  }
  if (p.delta != 0.0) {
    for (int i = periodic ? 0 : 1; i < (periodic ? n : n - 1); ++i) {
      const int l = (i - 1 + n) % n;
      const int r = (i + 1) % n;
      const double f = (i == 0 || i == n - 1) ? wrap : 1.0;
      add_term(m.a, 2 * l + 1, 2 * r, f * p.delta);
    }
  }
  for (int i = 0; i < n; ++i) add_term(m.a, 2 * i, 2 * i + 1, p.h);
  return m;
}

namespace {

struct Block {
  Eigen::VectorXd first, second;
  double e;
};

// Canonical pairs of a real antisymmetric matrix. Modes well separated from
// zero come from the Hermitian eigenproblem of iA: for iA v = lambda v with
// lambda > 0 and v = (x + iy)/sqrt(2), A x = lambda y and A y = -lambda x.
// The near-zero cluster is re-expressed in a real basis and treated
// recursively at its own scale, so tiny splittings stay accurate.
void canonical_pairs(const Eigen::MatrixXd& a, double abs_floor, std::vector<Block>& out) {
  const Eigen::Index dim = a.rows();
  if (dim == 0) return;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale <= abs_floor) {
    for (Eigen::Index p = 0; p + 1 < dim; p += 2) {
      out.push_back({Eigen::VectorXd::Unit(dim, p), Eigen::VectorXd::Unit(dim, p + 1), a(p, p + 1)});
    }
    return;
  }
  const Eigen::MatrixXcd ia = std::complex<double>(0, 1) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ia);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "BdG eigensolver failed");
  const double cut = 1e-6 * scale * std::sqrt(static_cast<double>(dim));
  std::vector<Eigen::Index> small;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > cut) {
      const Eigen::VectorXcd v = es.eigenvectors().col(i);
      Eigen::VectorXd x = std::sqrt(2.0) * v.real();
      Eigen::VectorXd y = std::sqrt(2.0) * v.imag();
      out.push_back({y, x, lam});
    } else if (lam >= -cut) {
      small.push_back(i);
    }
  }
  if (small.empty()) return;
  const auto ns = static_cast<Eigen::Index>(small.size());
  Eigen::MatrixXd stacked(dim, 2 * ns);
  for (Eigen::Index k = 0; k < ns; ++k) {
    stacked.col(k) = es.eigenvectors().col(small[k]).real();
    stacked.col(ns + k) = es.eigenvectors().col(small[k]).imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  const Eigen::MatrixXd q = svd.matrixU().leftCols(ns);
  if (ns % 2 != 0) fail(ErrorCode::NoConvergence, "odd-dimensional zero-mode cluster");
  const Eigen::MatrixXd b = q.transpose() * a * q;
  std::vector<Block> sub;
  canonical_pairs(0.5 * (b - b.transpose()), abs_floor, sub);
  for (const Block& blk : sub) out.push_back({q * blk.first, q * blk.second, blk.e});
}

}  // namespace

Modes diagonalize_bdg(const BdgModel& m) {
  const Eigen::Index dim = m.a.rows();
  if (dim != m.a.cols() || dim % 2 != 0) fail(ErrorCode::DimensionMismatch, "BdG matrix must be square of even size");
  const double scale = std::max(1.0, m.a.cwiseAbs().maxCoeff());
  if ((m.a + m.a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::NotAntisymmetric, "BdG matrix is not antisymmetric");
  }
  std::vector<Block> blocks;
  canonical_pairs(m.a, 1e-14 * scale, blocks);
  if (static_cast<Eigen::Index>(blocks.size()) * 2 != dim) fail(ErrorCode::NoConvergence, "incomplete BdG mode set");
  for (auto& b : blocks) {
    if (b.e < 0.0) {
      std::swap(b.first, b.second);
      b.e = -b.e;
    }
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) { return x.e < y.e; });

  Modes out;
  out.energies.resize(dim / 2);
  out.w.resize(dim, dim);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    out.energies(k) = blocks[k].e;
    out.w.row(2 * k) = blocks[k].first.transpose();
    out.w.row(2 * k + 1) = blocks[k].second.transpose();
    if (k > 0 && blocks[k].e - blocks[k - 1].e < 1e-12) out.degenerate = true;
  }
  // One Gram-Schmidt sweep keeps W orthogonal to working precision.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.w.transpose());
  Eigen::MatrixXd qm = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i)
    if (r(i, i) < 0) qm.col(i) = -qm.col(i);
  out.w = qm.transpose();
  return out;
}

void CovarianceMatrix::validate() const {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0) {
    fail(ErrorCode::DimensionMismatch, "covariance must be square of even size");
  }
  if ((gamma + gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    fail(ErrorCode::NotAntisymmetric, "covariance is not antisymmetric");
  }
  // Singular values of an antisymmetric matrix are the |nu| of its +-i nu pairs.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gamma);
  if (svd.singularValues().size() > 0 && svd.singularValues()(0) > 0.5 + 1e-9) {
    fail(ErrorCode::InvalidArgument, "covariance violates |nu| <= 1/2");
  }
}

CovarianceMatrix ground_covariance(const Modes& modes) {
  const auto n = static_cast<int>(modes.energies.size());
  return {0.5 * modes.w.transpose() * majorana_symplectic(n) * modes.w};
}

int vacuum_parity(const Modes& modes) { return modes.w.determinant() > 0.0 ? 1 : -1; }

SectorGround sector_ground_state(const ChainParams& p, Parity sector) {
  const BdgModel m = jordan_wigner_bdg(p, sector);
  Modes modes = diagonalize_bdg(m);
  SectorGround g;
  g.energy = -0.5 * modes.energies.sum();
  const int want = sector == Parity::Even ? 1 : -1;
  if (vacuum_parity(modes) != want) {
    modes.w.row(0).swap(modes.w.row(1));
    g.energy += modes.energies(0);
  }
  g.cov = ground_covariance(modes);
  return g;
}

Eigen::MatrixXd orthogonal_evolution(const Modes& modes, double t) {
  const Eigen::Index n = modes.energies.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = std::cos(modes.energies(k) * t);
    const double s = std::sin(modes.energies(k) * t);
    r(2 * k, 2 * k) = c;
    r(2 * k, 2 * k + 1) = s;
    r(2 * k + 1, 2 * k) = -s;
    r(2 * k + 1, 2 * k + 1) = c;
  }
  return modes.w.transpose() * r * modes.w;
}

CovarianceMatrix evolve_covariance(const CovarianceMatrix& g, const Modes& post, double t) {
  if (g.gamma.rows() != post.w.rows()) fail(ErrorCode::DimensionMismatch, "covariance and modes differ in size");
  const Eigen::MatrixXd o = orthogonal_evolution(post, t);
  return {o * g.gamma * o.transpose()};
}

double sigma_z_expectation(const CovarianceMatrix& g, int site) {
  if (site < 0 || 2 * site + 1 >= g.gamma.rows()) fail(ErrorCode::IndexOutOfRange, "site out of range");
  return 2.0 * g.gamma(2 * site, 2 * site + 1);
}

CrossSectorState make_cross_sector_state(const QuenchSpec& q, int site) {
  q.validate();
  if (site < 0 || site >= q.pre.n) fail(ErrorCode::IndexOutOfRange, "site out of range");
  CrossSectorState cs;
  cs.n = q.pre.n;
  cs.boundary = q.pre.boundary;
  cs.site = site;
  // Periodic chains are translation invariant, so the JW origin can sit on the
  // measured site; the Majorana matrices are unchanged by the relabelling.
  cs.origin = cs.boundary == Boundary::Periodic ? site : 0;
  cs.relative_phase = q.relative_phase;
  cs.m_even = 2.0 * sector_ground_state(q.pre, Parity::Even).cov.gamma;
  cs.m_odd = 2.0 * sector_ground_state(q.pre, Parity::Odd).cov.gamma;
  cs.a_post_even = jordan_wigner_bdg(q.post, Parity::Even).a;
  cs.a_post_odd = jordan_wigner_bdg(q.post, Parity::Odd).a;
  cs.post_even = diagonalize_bdg({cs.n, Parity::Even, cs.a_post_even});
  cs.post_odd = diagonalize_bdg({cs.n, Parity::Odd, cs.a_post_odd});
  return cs;
}

namespace {

// Evaluates <e| V(t) sigma^-(t) X_j |g> / <e|g> with g = X_j|o>,
// V(t) = e^{iH+ t} e^{-iH- t} and sigma^-(t) the Heisenberg operator under H-.
class RealSpaceKernel {
 public:
  explicit RealSpaceKernel(const CrossSectorState& cs) : cs_(cs) {
    const int n = cs.n;
    const int dim = 2 * n;
    j_ = (cs.site - cs.origin + n) % n;
    Eigen::VectorXd r = -Eigen::VectorXd::Ones(dim);
    for (int a = 0; a <= 2 * j_; ++a) r(a) = 1.0;
    const Eigen::MatrixXd m_g = r.asDiagonal() * cs.m_odd * r.asDiagonal();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    const cd i1(0, 1);
    const Eigen::MatrixXcd q_e = 0.5 * (id + i1 * cs.m_even);
    const Eigen::MatrixXcd p_e = 0.5 * (id - i1 * cs.m_even);
    const Eigen::MatrixXcd q_g = 0.5 * (id + i1 * m_g);
    const Eigen::MatrixXcd p_g = 0.5 * (id - i1 * m_g);
    overlap_ = std::pow(std::abs((0.5 * (cs.m_even + m_g)).determinant()), 0.25);
    if (overlap_ < 1e-12) {
      fail(ErrorCode::SectorCollapse, "even and odd sector states have no sigma_x matrix element");
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(q_g * q_e + p_g * p_e);
    t_ = 2.0 * lu.solve(q_g);
    if (!t_.allFinite()) fail(ErrorCode::SectorCollapse, "singular transition contraction");
    same_modes_ = (cs.a_post_even - cs.a_post_odd).cwiseAbs().maxCoeff() == 0.0;
    norm_ = evaluate(0.0, false);
    if (std::abs(norm_) < 1e-12) fail(ErrorCode::SectorCollapse, "degenerate string contraction");
  }

  // Returns (F, G) = (<e|X(t)|o>, <e|Y(t)|o>) in the gauge F(0) > 0.
  std::pair<cd, cd> amplitudes(double t) const {
    const double scale = overlap_ / std::abs(norm_);
    const cd ref = std::abs(norm_) / norm_;
    return {scale * ref * evaluate(t, false), scale * ref * evaluate(t, true)};
  }

  int j() const { return j_; }

 private:
  cd evaluate(double t, bool y_string) const {
    const int dim = 2 * cs_.n;
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> scale;
    std::vector<std::pair<int, double>> diag;  // (slot, a_k) for mode pairs
    if (!same_modes_) {
      for (int sector = 0; sector < 2; ++sector) {
        const Modes& m = sector == 0 ? cs_.post_even : cs_.post_odd;
        const double sign = sector == 0 ? -1.0 : 1.0;
        for (Eigen::Index k = 0; k < m.energies.size(); ++k) {
          const double th = 0.5 * m.energies(k) * t;
          diag.emplace_back(static_cast<int>(rows.size()), std::cos(th));
          rows.emplace_back(m.w.row(2 * k).transpose());
          scale.push_back(sign * std::sin(th));
          rows.emplace_back(m.w.row(2 * k + 1).transpose());
          scale.push_back(1.0);
        }
      }
    }
    std::vector<int> string;
    for (int a = 0; a < 2 * j_; ++a) string.push_back(a);
    string.push_back(y_string ? 2 * j_ + 1 : 2 * j_);
    const Eigen::MatrixXd o = orthogonal_evolution(cs_.post_odd, t);
    for (int a : string) {
      rows.emplace_back(o.row(a).transpose());
      scale.push_back(1.0);
    }
    for (int a = 0; a <= 2 * j_; ++a) {
      rows.emplace_back(Eigen::VectorXd::Unit(dim, a));
      scale.push_back(1.0);
    }
    const auto ns = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd u(ns, dim);
    for (Eigen::Index p = 0; p < ns; ++p) u.row(p) = rows[p].transpose();
    const Eigen::MatrixXcd c = u.cast<cd>() * t_ * u.transpose().cast<cd>();
    Eigen::MatrixXcd mp = Eigen::MatrixXcd::Zero(ns, ns);
    for (Eigen::Index p = 0; p < ns; ++p) {
      for (Eigen::Index q = p + 1; q < ns; ++q) {
        mp(p, q) = scale[p] * scale[q] * c(p, q);
        mp(q, p) = -mp(p, q);
      }
    }
    for (const auto& [p, a] : diag) {
      mp(p, p + 1) += a;
      mp(p + 1, p) -= a;
    }
    return pfaffian_unchecked(mp);
  }

  const CrossSectorState& cs_;
  int j_ = 0;
  double overlap_ = 0.0;
  Eigen::MatrixXcd t_;
  bool same_modes_ = false;
  cd norm_;
};

BlochVector assemble(const CrossSectorState& cs, const std::pair<cd, cd>& fg, double t, int j) {
  const cd ph = std::polar(1.0, cs.relative_phase);
  const double w = std::sin(2.0 * cs.chi);
  BlochVector b;
  b.rho_x = w * (ph * fg.first).real();
  b.rho_y = w * (ph * fg.second).real();
  const Eigen::MatrixXd oe = orthogonal_evolution(cs.post_even, t);
  const Eigen::MatrixXd oo = orthogonal_evolution(cs.post_odd, t);
  const double ze = oe.row(2 * j).dot(cs.m_even * oe.row(2 * j + 1).transpose());
  const double zo = oo.row(2 * j).dot(cs.m_odd * oo.row(2 * j + 1).transpose());
  const double c2 = std::cos(cs.chi) * std::cos(cs.chi);
  b.rho_z = c2 * ze + (1.0 - c2) * zo;
  return b;
}

}  // namespace

std::pair<double, double> sigma_xy_expectation(const CrossSectorState& cs, int site, double t) {
  if (site != cs.site) fail(ErrorCode::InvalidArgument, "cross-sector state was gauged at site " + std::to_string(cs.site));
  const double w = std::sin(2.0 * cs.chi);
  if (w == 0.0) return {0.0, 0.0};
  const RealSpaceKernel kernel(cs);
  const auto fg = kernel.amplitudes(t);
  const cd ph = std::polar(1.0, cs.relative_phase);
  return {w * (ph * fg.first).real(), w * (ph * fg.second).real()};
}

BlochVector bloch_vector(const CrossSectorState& cs, double t) {
  const int j = (cs.site - cs.origin + cs.n) % cs.n;
  if (std::sin(2.0 * cs.chi) == 0.0) return assemble(cs, {0.0, 0.0}, t, j);
  const RealSpaceKernel kernel(cs);
  return assemble(cs, kernel.amplitudes(t), t, j);
}

BlochTrajectory quench_trajectory_reference(const QuenchSpec& q, int site, const std::vector<double>& times) {
  const CrossSectorState cs = make_cross_sector_state(q, site);
  const RealSpaceKernel kernel(cs);
  BlochTrajectory traj;
  traj.times = times;
  traj.states.resize(times.size());
  const auto nt = static_cast<std::int64_t>(times.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < nt; ++k) {
    traj.states[k] = assemble(cs, kernel.amplitudes(times[k]), times[k], kernel.j());
  }
  return traj;
}

BlochTrajectory quench_trajectory(const QuenchSpec& q, int site, const std::vector<double>& times) {
  q.validate();
  if (momentum_path_applicable(q)) {
    try {
      return momentum_quench_trajectory(q, site, times);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SectorCollapse) throw;
    }
  }
  return quench_trajectory_reference(q, site, times);
}

}  // namespace qp::ff
