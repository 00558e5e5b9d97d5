#include "entrywise/errors.hpp"
#include "entrywise/linalg.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace entrywise;
using namespace entrywise::testing;

namespace {

double ortho_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

}  // namespace

TEST_CASE("svd_truncated: identity and rank-1 diagonal") {
  const SvdFactors f = svd_truncated(Matrix::Identity(3, 3));
  CHECK(f.rank == 3);
  CHECK((f.sigma - Vector::Ones(3)).norm() < 1e-15);
  CHECK(f.v_perp.cols() == 0);

  Matrix a(2, 2);
  a << 1, 0, 0, 0;
  const SvdFactors g = svd_truncated(a);
  CHECK(g.rank == 1);
  CHECK(g.sigma(0) == doctest::Approx(1.0));
  REQUIRE(g.v_perp.cols() == 1);
  CHECK(std::abs(std::abs(g.v_perp(1, 0)) - 1.0) < 1e-15);
}

TEST_CASE("svd_truncated: truncates a constructed tiny singular value") {
  Rng rng(11);
  Vector s(3);
  s << 3.0, 2.0, 1e-14;
  const Matrix a = matrix_with_spectrum(5, 3, s, rng);
  const SvdFactors f = svd_truncated(a, RankTolerance(1e-10));
  CHECK(f.rank == 2);
  CHECK(f.v_perp.cols() == 1);
  CHECK(f.sigma(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.sigma(1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("svd_truncated: zero matrix has rank 0 and full nullspace") {
  const SvdFactors f = svd_truncated(Matrix::Zero(3, 4));
  CHECK(f.rank == 0);
  CHECK(f.v_perp.cols() == 4);
  CHECK(ortho_defect(f.v_perp) < 1e-12);
  CHECK(pinv_apply(f, Vector::Ones(3)).norm() == 0.0);
}

TEST_CASE("svd_truncated: factor invariants on random shapes") {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 8);
    const Index n = 1 + static_cast<Index>(rng() % 8);
    const Index r = 1 + static_cast<Index>(rng() % std::min(m, n));
    const Matrix a = matrix_with_spectrum(m, n, log_uniform_spectrum(r, 0.1, 10.0, rng), rng);
    const SvdFactors f = svd_truncated(a);
    CHECK(f.rank == r);
    CHECK(ortho_defect(f.u) <= 1e-10);
    CHECK(ortho_defect(f.v) <= 1e-10);
    if (f.v_perp.cols() > 0) {
      CHECK(ortho_defect(f.v_perp) <= 1e-10);
      CHECK((f.v.transpose() * f.v_perp).norm() <= 1e-10);
    }
    for (Index i = 1; i < f.rank; ++i) CHECK(f.sigma(i - 1) >= f.sigma(i));
    CHECK(f.sigma(f.rank - 1) > f.trunc_rtol * f.sigma(0));
    CHECK((f.u * f.sigma.asDiagonal() * f.v.transpose() - a).norm() <= 1e-8 * a.norm());
  }
}

TEST_CASE("svd_truncated: rejects non-finite input and bad tolerances") {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_truncated(a), Error);
  CHECK_THROWS_AS(RankTolerance(0.0), Error);
  CHECK_THROWS_AS(RankTolerance(1.0), Error);
}

TEST_CASE("pinv_apply") {
  CHECK((pinv_apply(svd_truncated(Matrix::Identity(2, 2)), Vector{{3.0, -1.0}}) -
         Vector{{3.0, -1.0}})
            .norm() < 1e-15);
  Matrix d(2, 2);
  d << 2, 0, 0, 1;
  CHECK((pinv_apply(svd_truncated(d), Vector{{2.0, 1.0}}) - Vector{{1.0, 1.0}}).norm() < 1e-15);

  Rng rng(5);
  const Matrix a = gaussian_matrix(4, 3, rng);
  const Vector m = gaussian_vector(4, rng);
  const Vector normal = (a.transpose() * a).llt().solve(a.transpose() * m);
  CHECK((pinv_apply(svd_truncated(a), m) - normal).norm() <= 1e-10 * normal.norm());
  CHECK_THROWS_AS(pinv_apply(svd_truncated(a), Vector::Ones(3)), Error);
}

TEST_CASE("pinv_transpose_apply and norm") {
  const SvdFactors eye = svd_truncated(Matrix::Identity(2, 2));
  const Vector e1{{1.0, 0.0}};
  CHECK((pinv_transpose_apply(eye, e1) - e1).norm() < 1e-15);
  CHECK(pinv_transpose_norm(eye, e1) == doctest::Approx(1.0));

  Matrix d(2, 2);
  d << 2, 0, 0, 1;
  const SvdFactors fd = svd_truncated(d);
  CHECK((pinv_transpose_apply(fd, e1) - Vector{{0.5, 0.0}}).norm() < 1e-15);
  CHECK(pinv_transpose_norm(fd, e1) == doctest::Approx(0.5));

  Rng rng(8);
  const Matrix a = gaussian_matrix(6, 4, rng);
  const SvdFactors f = svd_truncated(a);
  const Matrix pinv = dense_pinv(a);
  const Vector e2 = Vector::Unit(4, 1);
  CHECK(pinv_transpose_norm(f, e2) == doctest::Approx(pinv.row(1).norm()).epsilon(1e-10));
  CHECK(pinv_transpose_apply(f, e2).norm() ==
        doctest::Approx(pinv.row(1).norm()).epsilon(1e-10));
  CHECK(pinv_transpose_norm_entry(f, 1) == doctest::Approx(pinv.row(1).norm()).epsilon(1e-10));
  CHECK_THROWS_AS(pinv_transpose_norm_entry(f, 4), Error);
}

TEST_CASE("residual_projection_norm") {
  CHECK(residual_projection_norm(svd_truncated(Matrix::Identity(2, 2)), Vector{{5.0, -7.0}}) <
        1e-14);
  const Matrix col = Matrix{{1.0}, {0.0}};
  CHECK(residual_projection_norm(svd_truncated(col), Vector{{0.0, 3.0}}) ==
        doctest::Approx(3.0));

  Rng rng(9);
  const Matrix a = gaussian_matrix(5, 2, rng);
  const Vector b = gaussian_vector(5, rng);
  const Vector oracle = (Matrix::Identity(5, 5) - a * dense_pinv(a)) * b;
  CHECK(residual_projection_norm(svd_truncated(a), b) ==
        doctest::Approx(oracle.norm()).epsilon(1e-10));
}

TEST_CASE("nullspace_component") {
  CHECK(nullspace_component(svd_truncated(Matrix::Identity(3, 3)), Vector::Unit(3, 1)).norm ==
        0.0);
  const Matrix row = Matrix{{1.0, 0.0}};
  const NullspaceComponent nc = nullspace_component(svd_truncated(row), Vector::Unit(2, 1));
  CHECK(nc.norm == doctest::Approx(1.0));
  CHECK(nc.coeffs.size() == 1);
  CHECK_FALSE(orthogonal_to_nullspace(svd_truncated(row), Vector::Unit(2, 1)));
  CHECK(orthogonal_to_nullspace(svd_truncated(row), Vector::Unit(2, 0)));

  Rng rng(10);
  const Matrix a = matrix_with_spectrum(4, 4, Vector{{2.0, 1.0}}, rng);
  const Vector w = gaussian_vector(4, rng);
  const Vector oracle = (Matrix::Identity(4, 4) - dense_pinv(a) * a) * w;
  CHECK(nullspace_component(svd_truncated(a), w).norm ==
        doctest::Approx(oracle.norm()).epsilon(1e-10));
}

TEST_CASE("property: pseudoinverse recovers row-space vectors and Pythagoras holds") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 7);
    const Index n = 1 + static_cast<Index>(rng() % 6);
    const Index r = 1 + static_cast<Index>(rng() % std::min(m, n));
    const Matrix a = matrix_with_spectrum(m, n, log_uniform_spectrum(r, 0.2, 5.0, rng), rng);
    const SvdFactors f = svd_truncated(a);

    const Vector x = f.v * gaussian_vector(f.rank, rng);
    CHECK((pinv_apply(f, a * x) - x).norm() <= 1e-8 * x.norm());

    const Vector b = gaussian_vector(m, rng);
    const Vector y = gaussian_vector(n, rng);
    const double lhs = (a * y - b).squaredNorm();
    const double rp = residual_projection_norm(f, b);
    const double rhs = (a * y - a * pinv_apply(f, b)).squaredNorm() + rp * rp;
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(lhs, 1.0));

    const Vector wr = f.v * gaussian_vector(f.rank, rng);
    CHECK(pinv_transpose_norm(f, wr) <= wr.norm() / f.sigma_min_positive() * (1 + 1e-12));
  }
}

TEST_CASE("property: nullspace norm is invariant to the choice of basis") {
  Rng rng(22);
  const Matrix a = matrix_with_spectrum(3, 6, Vector{{3.0, 1.0, 0.5}}, rng);
  SvdFactors f = svd_truncated(a);
  const Vector w = gaussian_vector(6, rng);
  const double before = nullspace_component(f, w).norm;
  f.v_perp = f.v_perp * random_orthonormal(f.v_perp.cols(), f.v_perp.cols(), rng);
  CHECK(std::abs(nullspace_component(f, w).norm - before) <= 1e-10);
}
