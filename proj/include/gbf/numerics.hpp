/**
 * This code is part of gbfkit.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE.txt file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 *
 * Any modifications or derivative works of this code must retain this
 * copyright notice, and modified files need to carry a notice indicating
 * that they have been altered from the originals.
 */

#ifndef GBF_NUMERICS_HPP
#define GBF_NUMERICS_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace gbf {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

/// Default tolerances used by all check operations.
/// `eq` is for scalar/functional equality, `cone` for eigenvalue and
/// cone-membership tests.
struct Tolerances {
  double eq = 1e-9;
  double cone = 1e-10;
};

inline bool approx_equal(cplx a, cplx b, double tol) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

/// Deterministic RNG for reproducible suites. Seed 0 is remapped so that
/// distinct small seeds give uncorrelated streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL) {}

  std::mt19937_64& engine() { return gen_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  cplx cnormal() { return cplx(normal(), normal()) / std::sqrt(2.0); }

  std::uint64_t integer(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  cvec random_vector(int dim) {
    cvec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cnormal();
    return v;
  }

  cvec random_unit_vector(int dim) {
    cvec v = random_vector(dim);
    return v / v.norm();
  }

  cmat random_matrix(int dim) {
    cmat m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = cnormal();
    return m;
  }

  /// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
  cmat haar_unitary(int dim) {
    cmat g = random_matrix(dim);
    Eigen::HouseholderQR<cmat> qr(g);
    cmat q = qr.householderQ();
    cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i) {
      cplx d = r(i, i);
      q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : cplx(1, 0);
    }
    return q;
  }

 private:
  std::mt19937_64 gen_;
};

/// Unitary with respect to the indefinite metric diag((-1)^{sig}):
/// U^dagger J U = J.  Constructed as exp(J A) with A anti-hermitian, which
/// lies in the metric-preserving group for any real scaling.
inline cmat krein_unitary(Rng& rng, const std::vector<int>& sig) {
  int dim = static_cast<int>(sig.size());
  cmat a = rng.random_matrix(dim);
  cmat anti = (a - a.adjoint()) / 2.0;
  cmat j = cmat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) j(i, i) = (sig[i] ? -1.0 : 1.0);
  cmat x = j * anti;
  return x.exp();
}

}  // namespace gbf

#endif  // GBF_NUMERICS_HPP
