#include "entrywise/bounds.hpp"

#include "entrywise/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace entrywise {

namespace {

constexpr double kFeasibilityRtol = 1e-12;
constexpr double kResidualFloor = 1e-10;

void require_length(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} has length {}, expected {}", what, x.size(), n));
  }
}

void require_index(Index i, Index n) {
  if (i < 0 || i >= n) {
    throw Error(ErrorCode::IndexOutOfRange, fmt::format("index {} outside [0, {})", i, n));
  }
}

// Shared by functional_bound and entrywise_bounds once the two projections of
// w are known: coeffs = Sigma^{-1} V^T w and the nullspace component norm.
EntryBound assemble_bound(const LinearSystem& sys, double midpoint, double sensitivity,
                          double null_norm, double w_norm) {
  EntryBound out;
  out.midpoint = midpoint;
  out.sensitivity = sensitivity;
  out.lambda = sys.lambda();
  if (!sys.feasible()) {
    out.status = BoundStatus::Infeasible;
    return out;
  }
  if (null_norm > sys.ortho_tol() * w_norm) {
    out.status = BoundStatus::Unbounded;
    return out;
  }
  out.status = BoundStatus::Finite;
  out.half_width = sensitivity * *sys.lambda();
  out.lower = midpoint - out.half_width;
  out.upper = midpoint + out.half_width;
  return out;
}

}  // namespace

std::string_view to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Finite: return "finite";
    case BoundStatus::Unbounded: return "unbounded";
    case BoundStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

Vector unit_vector(Index n, Index i) {
  require_index(i, n);
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// LinearSystem

LinearSystem::LinearSystem(const Matrix& a, const Vector& b, double epsilon, SolveOptions opts)
    : factors_(std::make_shared<const SvdFactors>(svd_truncated(a, opts.rank))),
      a_(std::make_shared<const Matrix>(a)),
      b_(b),
      ortho_tol_(opts.ortho_tol) {
  init(epsilon);
}

LinearSystem::LinearSystem(SvdFactors factors, const Vector& b, double epsilon, double ortho_tol)
    : factors_(std::make_shared<const SvdFactors>(std::move(factors))),
      b_(b),
      ortho_tol_(ortho_tol) {
  init(epsilon);
}

void LinearSystem::init(double epsilon) {
  require_length(b_, factors_->rows(), "data vector");
  if (!b_.allFinite()) throw Error(ErrorCode::InvalidInput, "data vector has non-finite entries");
  if (!(ortho_tol_ > 0.0)) throw Error(ErrorCode::InvalidInput, "ortho_tol must be positive");
  residual_norm_ = residual_projection_norm(*factors_, b_);
  z_ = pinv_apply(*factors_, b_);
  *this = with_epsilon(epsilon);
}

LinearSystem LinearSystem::with_epsilon(double epsilon) const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidInput, fmt::format("epsilon must be >= 0, got {}", epsilon));
  }
  LinearSystem out = *this;
  out.epsilon_ = epsilon;
  const double eps2 = epsilon * epsilon;
  const double deficit = eps2 - residual_norm_ * residual_norm_;
  const double floor = kResidualFloor * b_.norm();
  if (deficit >= 0.0) {
    out.lambda_ = std::sqrt(deficit);
  } else if (-deficit <= kFeasibilityRtol * eps2 + floor * floor) {
    out.lambda_ = 0.0;
  } else {
    out.lambda_.reset();
  }
  return out;
}

double LinearSystem::residual_of(const Vector& x) const {
  require_length(x, cols(), "solution vector");
  if (a_) return (*a_ * x - b_).norm();
  const SvdFactors& f = *factors_;
  return (f.u * f.sigma.cwiseProduct(f.v.transpose() * x) - b_).norm();
}

// ---------------------------------------------------------------------------
// Interval bounds

EntryBound functional_bound(const LinearSystem& sys, const Vector& w) {
  require_length(w, sys.cols(), "weight vector");
  const double w_norm = w.norm();
  if (w_norm == 0.0) throw Error(ErrorCode::ZeroFunctional, "weight vector is zero");
  const SvdFactors& f = sys.factors();
  return assemble_bound(sys, w.dot(sys.min_norm_solution()), pinv_transpose_norm(f, w),
                        nullspace_component(f, w).norm, w_norm);
}

std::vector<EntryBound> entrywise_bounds(const LinearSystem& sys) {
  const SvdFactors& f = sys.factors();
  const Vector& z = sys.min_norm_solution();
  std::vector<EntryBound> out;
  out.reserve(static_cast<std::size_t>(sys.cols()));
  for (Index i = 0; i < sys.cols(); ++i) {
    const double null_norm = f.v_perp.cols() > 0 ? f.v_perp.row(i).norm() : 0.0;
    out.push_back(assemble_bound(sys, z(i), pinv_transpose_norm_entry(f, i), null_norm, 1.0));
  }
  return out;
}

std::vector<EntryBound> adjacent_difference_bounds(const LinearSystem& sys,
                                                   std::span<const IndexPair> pairs) {
  std::vector<EntryBound> out;
  out.reserve(pairs.size());
  const Index n = sys.cols();
  for (const auto& [i, j] : pairs) {
    require_index(i, n);
    require_index(j, n);
    if (i == j) throw Error(ErrorCode::SamePair, fmt::format("pair ({}, {}) is degenerate", i, j));
    Vector w = Vector::Zero(n);
    w(i) = 1.0;
    w(j) = -1.0;
    out.push_back(functional_bound(sys, w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extremal solutions

ExtremalSolution extremal_solution(const LinearSystem& sys, const Vector& w,
                                   ExtremalTarget target) {
  const EntryBound bound = functional_bound(sys, w);
  if (bound.status == BoundStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible,
                fmt::format("residual outside R(A) is {} > epsilon = {}", sys.residual_norm(),
                            sys.epsilon()));
  }
  const SvdFactors& f = sys.factors();
  const Vector& z = sys.min_norm_solution();
  const bool arbitrary = target.kind == ExtremalTarget::Kind::Arbitrary;

  ExtremalSolution out;
  out.target = target;
  if (bound.status == BoundStatus::Finite) {
    if (arbitrary) {
      throw Error(ErrorCode::StatusMismatch,
                  "functional is bounded; only lower or upper targets are attainable at the "
                  "boundary");
    }
    // x = z +/- lambda V Sigma^{-1} p with p = Sigma^{-1} V^T w / ||Sigma^{-1} V^T w||.
    const Vector p = (f.v.transpose() * w).cwiseQuotient(f.sigma);
    const double sign = target.kind == ExtremalTarget::Kind::Upper ? 1.0 : -1.0;
    const double lambda = *bound.lambda;
    out.x = z + (sign * lambda / p.norm()) * (f.v * p.cwiseQuotient(f.sigma));
    out.expected_value = sign > 0 ? bound.upper : bound.lower;
  } else {
    if (!arbitrary) {
      throw Error(ErrorCode::StatusMismatch,
                  "functional is unbounded; request an arbitrary value instead");
    }
    // x = V_perp q + z with q = (alpha - w^T z) V_perp^T w / ||V_perp^T w||^2.
    const NullspaceComponent nc = nullspace_component(f, w);
    const double shift = (target.alpha - w.dot(z)) / (nc.norm * nc.norm);
    out.x = z + f.v_perp * (shift * nc.coeffs);
    out.expected_value = target.alpha;
  }
  out.achieved_value = w.dot(out.x);
  out.residual_norm = sys.residual_of(out.x);
  return out;
}

// ---------------------------------------------------------------------------
// Conditioning

ConditionReport condition_report(const SvdFactors& f) {
  ConditionReport out;
  out.rank = f.rank;
  out.sigma_max = f.sigma_max();
  out.sigma_min_pos = f.sigma_min_positive();
  if (f.full_column_rank()) out.kappa_global = out.sigma_max / out.sigma_min_pos;
  out.spectral_entry.resize(f.cols());
  for (Index i = 0; i < f.cols(); ++i) out.spectral_entry(i) = pinv_transpose_norm_entry(f, i);
  out.kappa_entry = out.spectral_entry * out.sigma_max;
  return out;
}

ConditionReport condition_report(const Matrix& a, RankTolerance tol) {
  return condition_report(svd_truncated(a, tol));
}

GlobalBound global_bounds(const SvdFactors& f, double n_norm) {
  if (!f.full_column_rank()) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("rank {} < {} columns; the spectral bound needs full column rank",
                            f.rank, f.cols()));
  }
  if (!(n_norm >= 0.0)) throw Error(ErrorCode::InvalidInput, "noise norm must be >= 0");
  const double spectral = n_norm / f.sigma_min_positive();
  return {spectral, spectral};
}

GlobalBound global_bounds(const Matrix& a, double n_norm, RankTolerance tol) {
  return global_bounds(svd_truncated(a, tol), n_norm);
}

double ellipsoid_volume(const SvdFactors& f, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  if (!f.full_column_rank()) {
    throw Error(ErrorCode::SingularGram,
                fmt::format("A^T A is singular (rank {} < {}); the ellipsoid has infinite volume",
                            f.rank, f.cols()));
  }
  if (lambda == 0.0) return 0.0;
  // sqrt|(A^T A)^{-1}| = prod 1/sigma_i; work in logs to avoid overflow.
  const double n = static_cast<double>(f.cols());
  const double log_volume = 0.5 * n * std::log(std::numbers::pi) + n * std::log(lambda) -
                            std::lgamma(0.5 * n + 1.0) - f.sigma.array().log().sum();
  return std::exp(log_volume);
}

double ellipsoid_volume(const Matrix& a, double lambda, RankTolerance tol) {
  return ellipsoid_volume(svd_truncated(a, tol), lambda);
}

CrlbCheck crlb_identity_check(const Matrix& a, Index i, RankTolerance tol) {
  require_finite(a, "matrix");
  require_index(i, a.cols());

  const Matrix gram = a.transpose() * a;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(std::max(tol.value() * tol.value(),
                            64.0 * std::numeric_limits<double>::epsilon()));
  cod.compute(gram);
  const Vector e = unit_vector(a.cols(), i);

  CrlbCheck out;
  out.lhs = cod.solve(e)(i);
  const double norm = pinv_transpose_norm_entry(svd_truncated(a, tol), i);
  out.rhs = norm * norm;
  return out;
}

double epsilon_heuristic(const SvdFactors& f, const Vector& b) {
  const Index m = f.rows();
  const Index n = f.cols();
  if (m <= n || !f.full_column_rank()) {
    throw Error(ErrorCode::NotOverdetermined,
                fmt::format("heuristic needs M > N and full column rank (M={}, N={}, rank={})", m,
                            n, f.rank));
  }
  const double ratio = static_cast<double>(m) / static_cast<double>(m - n);
  return std::sqrt(ratio) * residual_projection_norm(f, b);
}

}  // namespace entrywise
