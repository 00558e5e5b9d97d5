#include "entrywise/linalg.hpp"

#include "entrywise/errors.hpp"

#include <fmt/format.h>

namespace entrywise {

RankTolerance::RankTolerance(double rtol) : rtol_(rtol) {
  if (!(rtol > 0.0 && rtol < 1.0)) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("rank tolerance must lie in (0, 1), got {}", rtol));
  }
}

void require_finite(const Matrix& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw Error(ErrorCode::InvalidInput, fmt::format("{} is empty", what));
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::InvalidInput, fmt::format("{} has non-finite entries", what));
  }
}

namespace {

void require_length(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} has length {}, expected {}", what, x.size(), n));
  }
}

}  // namespace

SvdFactors svd_truncated(const Matrix& a, RankTolerance tol) {
  require_finite(a, "matrix");
  const Index n = a.cols();

  // Thin U is enough; the nullspace basis needs the full V.
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "SVD did not converge");
  }

  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? tol.value() * s(0) : 0.0;
  Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;

  SvdFactors f;
  f.rank = r;
  f.trunc_rtol = tol.value();
  f.u = svd.matrixU().leftCols(r);
  f.sigma = s.head(r);
  f.v = svd.matrixV().leftCols(r);
  f.v_perp = svd.matrixV().rightCols(n - r);
  return f;
}

Vector pinv_apply(const SvdFactors& f, const Vector& m) {
  require_length(m, f.rows(), "data vector");
  if (f.rank == 0) return Vector::Zero(f.cols());
  const Vector coeffs = (f.u.transpose() * m).cwiseQuotient(f.sigma);
  return f.v * coeffs;
}

Vector pinv_transpose_apply(const SvdFactors& f, const Vector& w) {
  require_length(w, f.cols(), "weight vector");
  if (f.rank == 0) return Vector::Zero(f.rows());
  const Vector coeffs = (f.v.transpose() * w).cwiseQuotient(f.sigma);
  return f.u * coeffs;
}

double pinv_transpose_norm(const SvdFactors& f, const Vector& w) {
  require_length(w, f.cols(), "weight vector");
  if (f.rank == 0) return 0.0;
  return (f.v.transpose() * w).cwiseQuotient(f.sigma).norm();
}

double pinv_transpose_norm_entry(const SvdFactors& f, Index i) {
  if (i < 0 || i >= f.cols()) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("entry {} outside [0, {})", i, f.cols()));
  }
  if (f.rank == 0) return 0.0;
  return f.v.row(i).transpose().cwiseQuotient(f.sigma).norm();
}

double residual_projection_norm(const SvdFactors& f, const Vector& b) {
  require_length(b, f.rows(), "data vector");
  if (f.rank == 0) return b.norm();
  return (b - f.u * (f.u.transpose() * b)).norm();
}

NullspaceComponent nullspace_component(const SvdFactors& f, const Vector& w) {
  require_length(w, f.cols(), "weight vector");
  NullspaceComponent out;
  out.coeffs = f.v_perp.transpose() * w;
  out.norm = out.coeffs.norm();
  return out;
}

bool orthogonal_to_nullspace(const SvdFactors& f, const Vector& w, double ortho_tol) {
  return nullspace_component(f, w).norm <= ortho_tol * w.norm();
}

}  // namespace entrywise
