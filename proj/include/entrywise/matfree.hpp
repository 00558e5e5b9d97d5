#pragma once

#include "entrywise/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace entrywise {

/// y = A x and x = A^T y without a stored matrix. Implementations must be
/// safe to call concurrently from several threads.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
  virtual Vector apply_transpose(const Vector& y) const = 0;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a);
  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;
  const Matrix& matrix() const noexcept { return a_; }

 private:
  Matrix a_;
};

class FunctionOperator final : public LinearOperator {
 public:
  using Map = std::function<Vector(const Vector&)>;
  FunctionOperator(Index rows, Index cols, Map apply, Map apply_transpose);
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;

 private:
  Index rows_;
  Index cols_;
  Map apply_;
  Map apply_transpose_;
};

// Largest |<A x, y> - <x, A^T y>| / (||x|| ||y||) over random Gaussian probes.
double adjoint_mismatch(const LinearOperator& op, int probes, std::uint64_t seed);

// Independent, reproducible RNG seed for substream `stream` of `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

// Rayleigh-quotient power iteration on A^T A. The estimate never exceeds
// sigma_1 and is deterministic for a given seed.
double power_iteration_sigma1(const LinearOperator& op, int iters, std::uint64_t seed);

struct LandweberConfig {
  double tau = 0.0;  // 0 selects 1 / sigma1_estimate^2
  int max_iters = 20000;
  double rel_tol = 1e-12;
  double sigma1_estimate = 0.0;
  // When set, also stop once max_j |1 - tau sigma_j^2|^k <= rate_tol.
  std::optional<double> sigma_r;
  double rate_tol = 1e-10;

  double step() const;
};

// Throws InvalidStep unless 0 < tau < 2 / sigma1_estimate^2.
void validate(const LandweberConfig& cfg);

// Smallest K with max(|1 - tau s1^2|, |1 - tau sr^2|)^K <= tol.
int rate_bound_iterations(double tau, double sigma1, double sigma_r, double tol);

enum class LandweberStop { UpdateTolerance, RateBound, MaxIterations };

struct LandweberResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  LandweberStop stop = LandweberStop::MaxIterations;
};

// x_k = x_{k-1} - tau A^T (A x_{k-1} - m) from x_0 = 0, which converges to
// A^+ m. There is deliberately no early stopping other than the gates in cfg.
LandweberResult landweber_pinv(const LinearOperator& op, const Vector& m,
                               const LandweberConfig& cfg);

enum class ProbeKind { Gaussian, Rademacher };

std::string_view to_string(ProbeKind kind);
ProbeKind parse_probe_kind(std::string_view name);

struct DiagEstimate {
  Vector values;  // estimates of ||(A^+)^T e_i||^2
  int samples = 0;
  int used_samples = 0;
  std::vector<int> flagged;  // samples whose Landweber run did not converge
  std::uint64_t seed = 0;
  ProbeKind probe_kind = ProbeKind::Gaussian;
};

// Mean of |A^+ z_s|^2 (entrywise) over i.i.d. probes with zero mean and
// identity covariance. Probe s is drawn from substream s of the seed, and
// partial sums are reduced in a fixed order, so the result depends only on
// (seed, samples, probe_kind, cfg).
DiagEstimate stochastic_diag(const LinearOperator& op, int samples, ProbeKind probe_kind,
                             std::uint64_t seed, const LandweberConfig& cfg,
                             unsigned threads = 1);

}  // namespace entrywise
