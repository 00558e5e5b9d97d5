#include "entrywise/errors.hpp"
#include "entrywise/matfree.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace entrywise;
using namespace entrywise::testing;

namespace {

Matrix diag21() {
  Matrix d(2, 2);
  d << 2, 0, 0, 1;
  return d;
}

Vector dense_diag_oracle(const Matrix& a) {
  // ||(A^+)^T e_i||^2 is the squared norm of row i of A^+.
  return dense_pinv(a).rowwise().squaredNorm();
}

struct BatchStats {
  Vector mean;
  Vector std_error;
};

BatchStats replicate(const LinearOperator& op, int samples, int replicates, ProbeKind kind,
                     std::uint64_t base_seed, const LandweberConfig& cfg) {
  const Index n = op.cols();
  Matrix est(n, replicates);
  for (int r = 0; r < replicates; ++r) {
    est.col(r) = stochastic_diag(op, samples, kind, base_seed + r, cfg).values;
  }
  BatchStats out;
  out.mean = est.rowwise().mean();
  const Matrix centered = est.colwise() - out.mean;
  out.std_error = (centered.rowwise().squaredNorm() / (replicates - 1.0)).cwiseSqrt() /
                  std::sqrt(static_cast<double>(replicates));
  return out;
}

}  // namespace

TEST_CASE("operators pass the adjoint test") {
  Rng rng(1);
  const DenseOperator dense(gaussian_matrix(7, 5, rng));
  CHECK(adjoint_mismatch(dense, 20, 3) <= 1e-12 * power_iteration_sigma1(dense, 100, 1));

  const Matrix a = gaussian_matrix(4, 3, rng);
  const FunctionOperator fn(
      4, 3, [a](const Vector& x) -> Vector { return a * x; },
      [a](const Vector& y) -> Vector { return a.transpose() * y; });
  CHECK(adjoint_mismatch(fn, 20, 4) <= 1e-12);
  CHECK_THROWS_AS(fn.apply(Vector::Ones(4)), Error);
}

TEST_CASE("power_iteration_sigma1") {
  CHECK(power_iteration_sigma1(DenseOperator(Matrix::Identity(4, 4)), 5, 1) ==
        doctest::Approx(1.0).epsilon(1e-6));

  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  CHECK(std::abs(power_iteration_sigma1(DenseOperator(d), 200, 2) - 3.0) <= 1e-3);

  Rng rng(2);
  const Matrix a = gaussian_matrix(50, 30, rng);
  const double sigma1 = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  const double est = power_iteration_sigma1(DenseOperator(a), 500, 9);
  CHECK(est <= sigma1 * (1 + 1e-12));
  CHECK(est >= 0.999 * sigma1);
  CHECK(est == power_iteration_sigma1(DenseOperator(a), 500, 9));
}

TEST_CASE("landweber_pinv: closed-form fixtures") {
  LandweberConfig cfg;
  cfg.sigma1_estimate = 1.0;
  cfg.tau = 1.0;
  const Vector m{{1.0, 2.0, 3.0}};
  const LandweberResult r = landweber_pinv(DenseOperator(Matrix::Identity(3, 3)), m, cfg);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK((r.x - m).norm() == 0.0);

  LandweberConfig cd;
  cd.sigma1_estimate = 2.0;
  cd.tau = 0.4;
  cd.max_iters = 100;
  cd.rel_tol = 1e-14;
  const LandweberResult rd = landweber_pinv(DenseOperator(diag21()), Vector{{2.0, 1.0}}, cd);
  CHECK((rd.x - Vector{{1.0, 1.0}}).norm() <= 1e-8);
}

TEST_CASE("landweber_pinv: matches the dense pseudoinverse within the rate bound") {
  Rng rng(3);
  const Vector spectrum = log_uniform_spectrum(8, 0.5, 2.0, rng);
  const Matrix a = matrix_with_spectrum(12, 8, spectrum, rng);
  const Vector m = gaussian_vector(12, rng);
  LandweberConfig cfg;
  cfg.sigma1_estimate = spectrum(0);
  cfg.sigma_r = spectrum(7);
  cfg.rate_tol = 1e-7;
  cfg.rel_tol = 0.0;
  const LandweberResult r = landweber_pinv(DenseOperator(a), m, cfg);
  const int k = rate_bound_iterations(cfg.step(), spectrum(0), spectrum(7), 1e-7);
  CHECK(r.stop == LandweberStop::RateBound);
  CHECK(r.iterations == k);
  const Vector exact = dense_pinv(a) * m;
  CHECK((r.x - exact).norm() <= 1e-6 * exact.norm());
}

TEST_CASE("landweber_pinv: rank-deficient operators give the minimum-norm solution") {
  Rng rng(4);
  const Matrix a = matrix_with_spectrum(6, 5, Vector{{2.0, 1.5, 0.8}}, rng);
  const Vector x = gaussian_vector(5, rng);
  LandweberConfig cfg;
  cfg.sigma1_estimate = 2.0;
  cfg.sigma_r = 0.8;
  cfg.rel_tol = 0.0;
  const LandweberResult r = landweber_pinv(DenseOperator(a), a * x, cfg);
  const SvdFactors f = svd_truncated(a);
  CHECK((f.v_perp.transpose() * r.x).norm() <= 1e-6 * r.x.norm());
  const Vector projected = f.v * (f.v.transpose() * x);
  CHECK((r.x - projected).norm() <= 1e-6 * projected.norm());
}

TEST_CASE("landweber_pinv: error and non-convergence paths") {
  LandweberConfig cfg;
  cfg.sigma1_estimate = 2.0;
  cfg.tau = 0.5;  // == 2 / sigma1^2, outside the open interval
  CHECK_THROWS_AS(landweber_pinv(DenseOperator(diag21()), Vector::Ones(2), cfg), Error);
  cfg.tau = -0.1;
  CHECK_THROWS_AS(validate(cfg), Error);

  LandweberConfig slow;
  slow.sigma1_estimate = 2.0;
  slow.max_iters = 3;
  slow.rel_tol = 0.0;
  const LandweberResult r = landweber_pinv(DenseOperator(diag21()), Vector::Ones(2), slow);
  CHECK_FALSE(r.converged);
  CHECK(r.stop == LandweberStop::MaxIterations);
  CHECK(r.iterations == 3);

  // Zero data converges immediately to the zero vector.
  const LandweberResult z = landweber_pinv(DenseOperator(diag21()), Vector::Zero(2), slow);
  CHECK(z.converged);
  CHECK(z.x.norm() == 0.0);
}

TEST_CASE("stochastic_diag: identity and diag(2,1)") {
  LandweberConfig cfg;
  cfg.sigma1_estimate = 1.0;
  const DiagEstimate eye =
      stochastic_diag(DenseOperator(Matrix::Identity(2, 2)), 4000, ProbeKind::Gaussian, 5, cfg);
  CHECK(eye.values(0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(eye.values(1) == doctest::Approx(1.0).epsilon(0.1));
  const DiagEstimate eye_r = stochastic_diag(DenseOperator(Matrix::Identity(2, 2)), 3,
                                             ProbeKind::Rademacher, 5, cfg);
  CHECK(eye_r.values(0) == doctest::Approx(1.0));

  LandweberConfig cd;
  cd.sigma1_estimate = 2.0;
  cd.sigma_r = 1.0;
  const DiagEstimate d =
      stochastic_diag(DenseOperator(diag21()), 10000, ProbeKind::Gaussian, 17, cd);
  CHECK(std::abs(d.values(0) - 0.25) <= 0.05 * 0.25);
  CHECK(std::abs(d.values(1) - 1.0) <= 0.05);
  CHECK(d.used_samples == 10000);
  CHECK(d.flagged.empty());
}

TEST_CASE("stochastic_diag: reproducible regardless of worker count") {
  Rng rng(6);
  const Matrix a = matrix_with_spectrum(9, 6, log_uniform_spectrum(6, 0.5, 2.0, rng), rng);
  LandweberConfig cfg;
  cfg.sigma1_estimate = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  const DenseOperator op(a);
  const DiagEstimate one = stochastic_diag(op, 200, ProbeKind::Gaussian, 42, cfg, 1);
  const DiagEstimate four = stochastic_diag(op, 200, ProbeKind::Gaussian, 42, cfg, 4);
  CHECK(one.values == four.values);
  const DiagEstimate other = stochastic_diag(op, 200, ProbeKind::Gaussian, 43, cfg, 1);
  CHECK(one.values != other.values);
}

TEST_CASE("stochastic_diag: non-converged samples are flagged and excluded") {
  LandweberConfig cfg;
  cfg.sigma1_estimate = 2.0;
  cfg.max_iters = 2;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(stochastic_diag(DenseOperator(diag21()), 5, ProbeKind::Gaussian, 1, cfg),
                  Error);
}

TEST_CASE("property: stochastic_diag is unbiased over independent seeds") {
  Rng rng(7);
  const Matrix a = matrix_with_spectrum(8, 4, log_uniform_spectrum(4, 0.5, 2.0, rng), rng);
  const Vector oracle = dense_diag_oracle(a);
  LandweberConfig cfg;
  cfg.sigma1_estimate = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  const BatchStats stats = replicate(DenseOperator(a), 50, 50, ProbeKind::Gaussian, 1000, cfg);
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(stats.mean(i) - oracle(i)) <= 3.0 * stats.std_error(i));
  }
}

TEST_CASE("property: Gaussian and Rademacher probes agree in expectation") {
  Rng rng(8);
  const Matrix a = matrix_with_spectrum(8, 4, log_uniform_spectrum(4, 0.5, 2.0, rng), rng);
  LandweberConfig cfg;
  cfg.sigma1_estimate = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
  const DenseOperator op(a);
  const BatchStats g = replicate(op, 1000, 10, ProbeKind::Gaussian, 100, cfg);
  const BatchStats r = replicate(op, 1000, 10, ProbeKind::Rademacher, 200, cfg);
  for (Index i = 0; i < 4; ++i) {
    const double joint = std::sqrt(g.std_error(i) * g.std_error(i) +
                                   r.std_error(i) * r.std_error(i));
    CHECK(std::abs(g.mean(i) - r.mean(i)) <= 3.0 * joint);
  }
}
