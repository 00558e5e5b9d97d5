#pragma once

// Random fixtures and dense oracles shared by the unit and acceptance tests.
// Oracles deliberately avoid the library's SVD path: pseudoinverses come from
// Eigen's complete orthogonal decomposition and extremal values from a
// Lagrangian bisection on the KKT system.

#include "entrywise/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace entrywise::testing {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(Index m, Index n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = g(rng);
  return a;
}

inline Vector gaussian_vector(Index n, Rng& rng) { return gaussian_matrix(n, 1, rng).col(0); }

// m x k with orthonormal columns (k <= m).
inline Matrix random_orthonormal(Index m, Index k, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(m, m, rng));
  Matrix q = qr.householderQ();
  return q.leftCols(k);
}

// A = Q diag(sigmas) P^T with orthonormal Q (m x r), P (n x r).
inline Matrix matrix_with_spectrum(Index m, Index n, const Vector& sigmas, Rng& rng) {
  const Index r = sigmas.size();
  return random_orthonormal(m, r, rng) * sigmas.asDiagonal() *
         random_orthonormal(n, r, rng).transpose();
}

inline Vector log_uniform_spectrum(Index r, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vector s(r);
  for (Index i = 0; i < r; ++i) s(i) = std::exp(u(rng));
  std::sort(s.data(), s.data() + r, std::greater<>());
  return s;
}

inline Matrix dense_pinv(const Matrix& a) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(1e-10);
  return cod.pseudoInverse();
}

// Orthonormal nullspace basis from a rank-revealing LU (independent of SVD).
inline Matrix lu_kernel(const Matrix& a) {
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-9);
  Matrix k = lu.kernel();
  if (lu.rank() == a.cols()) return Matrix(a.cols(), 0);
  Eigen::HouseholderQR<Matrix> qr(k);
  Matrix q = qr.householderQ();
  return q.leftCols(k.cols());
}

struct OracleInterval {
  enum class Kind { Finite, Unbounded, Infeasible } kind = Kind::Finite;
  double lower = 0.0;
  double upper = 0.0;
};

// max / min of w^T x subject to ||A x - b|| <= eps, solved from the KKT
// stationarity condition A^T A x = A^T b + t w: the residual of the
// minimum-norm solution x(t) grows with |t|, so t is bisected until the
// constraint is active.
inline OracleInterval kkt_interval(const Matrix& a, const Vector& b, double eps, const Vector& w) {
  OracleInterval out;
  const Matrix gram = a.transpose() * a;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-13);
  cod.compute(gram);
  const Vector atb = a.transpose() * b;
  auto x_of = [&](double t) -> Vector { return cod.solve(atb + t * w); };
  auto resid = [&](double t) { return (a * x_of(t) - b).norm(); };

  const double r0 = resid(0.0);
  if (r0 > eps * (1.0 + 1e-9) + 1e-12) {
    out.kind = OracleInterval::Kind::Infeasible;
    return out;
  }
  const Matrix kernel = lu_kernel(a);
  if (kernel.cols() > 0 && (kernel.transpose() * w).norm() > 1e-6 * w.norm()) {
    out.kind = OracleInterval::Kind::Unbounded;
    return out;
  }
  auto extreme = [&](double sign) {
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (resid(sign * hi) < eps && guard++ < 200) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (resid(sign * mid) < eps ? lo : hi) = mid;
    }
    return w.dot(x_of(sign * 0.5 * (lo + hi)));
  };
  out.upper = extreme(1.0);
  out.lower = extreme(-1.0);
  return out;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace entrywise::testing
