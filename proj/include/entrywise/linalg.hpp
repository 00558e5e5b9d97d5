#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace entrywise {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative threshold deciding the numerical rank: sigma_i is kept iff
// sigma_i > rtol * sigma_1.
class RankTolerance {
 public:
  static constexpr double kDefault = 1e-10;

  constexpr RankTolerance() = default;
  explicit RankTolerance(double rtol);

  double value() const noexcept { return rtol_; }

 private:
  double rtol_ = kDefault;
};

// Default threshold for the predicate "w is orthogonal to N(A)":
// ||V_perp^T w|| <= ortho_tol * ||w||.
inline constexpr double kDefaultOrthoTol = 1e-8;

/// Truncated SVD A = U diag(sigma) V^T together with an orthonormal basis
/// V_perp of the nullspace. U_perp is never formed.
struct SvdFactors {
  Matrix u;        // M x r
  Vector sigma;    // r, nonincreasing, all > trunc_rtol * sigma(0)
  Matrix v;        // N x r
  Matrix v_perp;   // N x (N - r)
  Index rank = 0;
  double trunc_rtol = RankTolerance::kDefault;

  Index rows() const noexcept { return u.rows(); }
  Index cols() const noexcept { return v.rows(); }
  bool full_column_rank() const noexcept { return rank == cols(); }
  double sigma_max() const noexcept { return rank > 0 ? sigma(0) : 0.0; }
  double sigma_min_positive() const noexcept { return rank > 0 ? sigma(rank - 1) : 0.0; }
};

struct NullspaceComponent {
  Vector coeffs;  // V_perp^T w
  double norm = 0.0;
};

// Throws InvalidInput for empty or non-finite input.
void require_finite(const Matrix& a, const char* what);

SvdFactors svd_truncated(const Matrix& a, RankTolerance tol = RankTolerance{});

// A^+ m = V Sigma^{-1} U^T m.
Vector pinv_apply(const SvdFactors& f, const Vector& m);

// (A^+)^T w = U Sigma^{-1} V^T w.
Vector pinv_transpose_apply(const SvdFactors& f, const Vector& w);

// ||(A^+)^T w||_2 = ||Sigma^{-1} V^T w||_2 without touching U.
double pinv_transpose_norm(const SvdFactors& f, const Vector& w);

// Same as pinv_transpose_norm(f, e_i) in O(r).
double pinv_transpose_norm_entry(const SvdFactors& f, Index i);

// ||b - U U^T b||_2, the norm of the part of b outside R(A).
double residual_projection_norm(const SvdFactors& f, const Vector& b);

NullspaceComponent nullspace_component(const SvdFactors& f, const Vector& w);

bool orthogonal_to_nullspace(const SvdFactors& f, const Vector& w,
                             double ortho_tol = kDefaultOrthoTol);

}  // namespace entrywise
