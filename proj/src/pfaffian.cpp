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

#include "quenchphase/pfaffian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quenchphase/errors.hpp"

namespace qp {
namespace {

template <typename Mat>
void check_input(const Mat& a) {
  if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, "pfaffian needs a square matrix");
  if (a.rows() % 2 != 0) fail(ErrorCode::OddDimension, "pfaffian of odd-dimensional matrix");
  if (a.size() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(ErrorCode::NotAntisymmetric, "pfaffian input is not antisymmetric");
  }
}

// Reduces A in place using only its strict lower triangle; returns Pf as a
// unit-modulus phase and log|Pf|.
template <typename Scalar>
void parlett_reid(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, Scalar& phase,
                  double& log_abs) {
  using std::abs;
  const Eigen::Index n = a.rows();
  phase = Scalar(1);
  log_abs = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
    kp += k + 1;
    const Eigen::Index p = k + 1;
    if (kp != p) {
      // Symmetric swap of indices p and kp in lower storage.
      std::swap(a(p, k), a(kp, k));
      for (Eigen::Index i = p + 1; i < kp; ++i) {
        const Scalar tmp = a(i, p);
        a(i, p) = -a(kp, i);
        a(kp, i) = -tmp;
      }
      a(kp, p) = -a(kp, p);
      for (Eigen::Index i = kp + 1; i < n; ++i) std::swap(a(i, p), a(i, kp));
      phase = -phase;
    }
    const Scalar piv = a(p, k);  // = -A(k, k+1)
    if (piv == Scalar(0)) {
      phase = Scalar(0);
      log_abs = -std::numeric_limits<double>::infinity();
      return;
    }
    phase *= -piv / Scalar(abs(piv));
    log_abs += std::log(abs(piv));
    const Eigen::Index m = n - k - 2;
    if (m > 0) {
      const auto tau = (a.col(k).tail(m) / piv).eval();
      const auto col = a.col(p).tail(m).eval();
      for (Eigen::Index c = 0; c < m; ++c) {
        const Scalar tc = tau(c);
        const Scalar cc = col(c);
        Scalar* dst = &a(k + 2, k + 2 + c);
        for (Eigen::Index r = c + 1; r < m; ++r) dst[r] += tau(r) * cc - col(r) * tc;
      }
    }
  }
}

}  // namespace

double pfaffian(const Eigen::MatrixXd& a) {
  check_input(a);
  if (a.rows() == 0) return 1.0;
  Eigen::MatrixXd w = a;
  double phase;
  double log_abs;
  parlett_reid(w, phase, log_abs);
  return phase == 0.0 ? 0.0 : phase * std::exp(log_abs);
}

std::complex<double> pfaffian(const Eigen::MatrixXcd& a) {
  check_input(a);
  return pfaffian_unchecked(a);
}

std::complex<double> pfaffian_unchecked(Eigen::MatrixXcd a) {
  if (a.rows() == 0) return 1.0;
  std::complex<double> phase;
  double log_abs;
  parlett_reid(a, phase, log_abs);
  return phase == 0.0 ? 0.0 : phase * std::exp(log_abs);
}

LogPfaffian log_pfaffian(const Eigen::MatrixXcd& a) {
  check_input(a);
  if (a.rows() == 0) return {1.0, 0.0};
  Eigen::MatrixXcd w = a;
  LogPfaffian out{};
  parlett_reid(w, out.phase, out.log_abs);
  return out;
}

}  // namespace qp
