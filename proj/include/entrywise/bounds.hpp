#pragma once

#include "entrywise/linalg.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace entrywise {

struct SolveOptions {
  RankTolerance rank{};
  double ortho_tol = kDefaultOrthoTol;
};

/// The data model {x : ||A x - b||_2 <= epsilon}.
///
/// The SVD of A is computed once at construction and shared between copies,
/// so deriving a system with a different epsilon is cheap. Everything that
/// depends only on (A, b) -- the residual outside R(A) and the minimum-norm
/// solution z = A^+ b -- is cached as well.
class LinearSystem {
 public:
  LinearSystem(const Matrix& a, const Vector& b, double epsilon, SolveOptions opts = {});
  LinearSystem(SvdFactors factors, const Vector& b, double epsilon,
               double ortho_tol = kDefaultOrthoTol);

  LinearSystem with_epsilon(double epsilon) const;

  const SvdFactors& factors() const noexcept { return *factors_; }
  const Vector& data() const noexcept { return b_; }
  double epsilon() const noexcept { return epsilon_; }
  double ortho_tol() const noexcept { return ortho_tol_; }
  Index rows() const noexcept { return factors_->rows(); }
  Index cols() const noexcept { return factors_->cols(); }

  // ||P_{R(A)^perp} b||_2
  double residual_norm() const noexcept { return residual_norm_; }
  // A^+ b
  const Vector& min_norm_solution() const noexcept { return z_; }

  // sqrt(epsilon^2 - ||P_{R(A)^perp} b||^2); empty when the feasible set is
  // empty. A deficit within 1e-12 epsilon^2 + (1e-10 ||b||)^2 is treated as
  // rounding and clamped to zero.
  std::optional<double> lambda() const noexcept { return lambda_; }
  bool feasible() const noexcept { return lambda_.has_value(); }

  // ||A x - b||_2, using the original matrix when one was supplied.
  double residual_of(const Vector& x) const;

 private:
  void init(double epsilon);

  std::shared_ptr<const SvdFactors> factors_;
  std::shared_ptr<const Matrix> a_;  // null when built from factors
  Vector b_;
  double epsilon_ = 0.0;
  double ortho_tol_ = kDefaultOrthoTol;
  double residual_norm_ = 0.0;
  Vector z_;
  std::optional<double> lambda_;
};

enum class BoundStatus { Finite, Unbounded, Infeasible };

std::string_view to_string(BoundStatus s);

/// Range of w^T x over the feasible set. lower/upper/half_width are only
/// meaningful when status == Finite.
struct EntryBound {
  BoundStatus status = BoundStatus::Finite;
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;     // w^T A^+ b
  double half_width = 0.0;   // sensitivity * lambda
  double sensitivity = 0.0;  // ||(A^+)^T w||_2
  std::optional<double> lambda;
};

EntryBound functional_bound(const LinearSystem& sys, const Vector& w);

// functional_bound(sys, e_i) for every i, sharing the factorization.
std::vector<EntryBound> entrywise_bounds(const LinearSystem& sys);

using IndexPair = std::pair<Index, Index>;

// Bounds on x_i - x_j for each (i, j).
std::vector<EntryBound> adjacent_difference_bounds(const LinearSystem& sys,
                                                   std::span<const IndexPair> pairs);

struct ExtremalTarget {
  enum class Kind { Lower, Upper, Arbitrary };
  Kind kind = Kind::Upper;
  double alpha = 0.0;  // Arbitrary only

  static ExtremalTarget lower() { return {Kind::Lower, 0.0}; }
  static ExtremalTarget upper() { return {Kind::Upper, 0.0}; }
  static ExtremalTarget value(double a) { return {Kind::Arbitrary, a}; }
};

struct ExtremalSolution {
  Vector x;
  double achieved_value = 0.0;  // w^T x
  double expected_value = 0.0;  // L, U or alpha
  double residual_norm = 0.0;   // ||A x - b||_2
  ExtremalTarget target;
};

// Feasible point attaining L or U (finite functionals) or an arbitrary value
// alpha (unbounded functionals). Throws StatusMismatch or Infeasible.
ExtremalSolution extremal_solution(const LinearSystem& sys, const Vector& w,
                                   ExtremalTarget target);

struct ConditionReport {
  double sigma_max = 0.0;
  double sigma_min_pos = 0.0;
  Index rank = 0;
  std::optional<double> kappa_global;  // only for full column rank
  Vector kappa_entry;                  // ||(A^+)^T e_i|| * sigma_1
  Vector spectral_entry;               // ||(A^+)^T e_i||
};

ConditionReport condition_report(const SvdFactors& f);
ConditionReport condition_report(const Matrix& a, RankTolerance tol = RankTolerance{});

struct GlobalBound {
  double spectral = 0.0;            // ||n|| / sigma_N
  double per_entry_envelope = 0.0;  // same value read as a bound on ||.||_inf
};

GlobalBound global_bounds(const SvdFactors& f, double n_norm);
GlobalBound global_bounds(const Matrix& a, double n_norm, RankTolerance tol = RankTolerance{});

// Volume of {x : ||A (x - z)|| <= lambda}. Throws SingularGram when A^T A is
// singular (the set is a degenerate ellipsoid of infinite volume).
double ellipsoid_volume(const SvdFactors& f, double lambda);
double ellipsoid_volume(const Matrix& a, double lambda, RankTolerance tol = RankTolerance{});

struct CrlbCheck {
  double lhs = 0.0;  // e_i^T (A^T A)^+ e_i via the Gram matrix
  double rhs = 0.0;  // ||(A^+)^T e_i||^2 via the SVD
};

CrlbCheck crlb_identity_check(const Matrix& a, Index i, RankTolerance tol = RankTolerance{});

// sqrt(M / (M - N)) * ||P_{R(A)^perp} b||. Requires M > N and full column rank.
double epsilon_heuristic(const SvdFactors& f, const Vector& b);

Vector unit_vector(Index n, Index i);

}  // namespace entrywise
