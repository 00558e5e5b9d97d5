#include "entrywise/bounds.hpp"
#include "entrywise/complex_lift.hpp"
#include "entrywise/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace entrywise;
using namespace entrywise::testing;

namespace {

using cd = std::complex<double>;

ComplexMatrix random_complex(Index m, Index n, Rng& rng) {
  ComplexMatrix a(m, n);
  a.real() = gaussian_matrix(m, n, rng);
  a.imag() = gaussian_matrix(m, n, rng);
  return a;
}

}  // namespace

TEST_CASE("lift_system: closed-form fixtures") {
  ComplexMatrix a(1, 1);
  a(0, 0) = cd(0.0, 1.0);
  ComplexVector b(1);
  b(0) = cd(1.0, 0.0);
  const auto [sys, br] = lift_system(a, b);
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  CHECK(sys.a_real == expected);
  CHECK(br == Vector{{1.0, 0.0}});

  const ComplexMatrix eye = ComplexMatrix::Identity(3, 3);
  CHECK(lift_matrix(eye) == Matrix::Identity(6, 6));

  CHECK_THROWS_AS(lift_system(eye, ComplexVector::Zero(2)), Error);
}

TEST_CASE("lift_system preserves residual norms") {
  Rng rng(1);
  const ComplexMatrix a = random_complex(3, 2, rng);
  const ComplexVector b = random_complex(3, 1, rng).col(0);
  const auto [sys, br] = lift_system(a, b);
  for (int t = 0; t < 100; ++t) {
    const ComplexVector x = random_complex(2, 1, rng).col(0);
    const double complex_norm = (a * x - b).norm();
    const double real_norm = (sys.a_real * lift_vector(x) - br).norm();
    CHECK(std::abs(complex_norm - real_norm) <= 1e-12 * std::max(complex_norm, 1.0));
  }
}

TEST_CASE("unlift_solution") {
  LiftedSystem sys;
  sys.complex_rows = 1;
  sys.complex_cols = 2;
  const ComplexVector x = unlift_solution(sys, Vector{{1.0, 2.0, 3.0, 4.0}});
  CHECK(x(0) == cd(1.0, 3.0));
  CHECK(x(1) == cd(2.0, 4.0));
  CHECK(unlift_solution(sys, Vector::Zero(4)).norm() == 0.0);
  CHECK_THROWS_AS(unlift_solution(sys, Vector::Zero(3)), Error);

  Rng rng(2);
  const ComplexVector v = random_complex(5, 1, rng).col(0);
  CHECK(unlift_vector(lift_vector(v)) == v);
}

TEST_CASE("index_map is a bijection onto the lifted coordinates") {
  Rng rng(3);
  const auto [sys, br] = lift_system(random_complex(4, 3, rng), ComplexVector::Zero(4));
  std::vector<int> hits(6, 0);
  for (const auto& [re, im] : sys.index_map()) {
    ++hits[static_cast<std::size_t>(re)];
    ++hits[static_cast<std::size_t>(im)];
  }
  for (int h : hits) CHECK(h == 1);
  CHECK(sys.coordinate(2, Part::Imag) == 5);
  CHECK_THROWS_AS(sys.coordinate(3, Part::Real), Error);
}

TEST_CASE("realified singular values pair-match the complex SVD") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix a = random_complex(5, 3, rng);
    const Vector complex_sv = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
    const SvdFactors f = svd_truncated(lift_matrix(a));
    REQUIRE(f.rank == 6);
    for (Index i = 0; i < 3; ++i) {
      CHECK(std::abs(f.sigma(2 * i) - complex_sv(i)) <= 1e-10);
      CHECK(std::abs(f.sigma(2 * i + 1) - complex_sv(i)) <= 1e-10);
    }
  }
}

TEST_CASE("entrywise bounds on lifted coordinates match the lifted unit functional") {
  Rng rng(5);
  const ComplexMatrix a = random_complex(6, 3, rng);
  const ComplexVector b = random_complex(6, 1, rng).col(0);
  const auto [lifted, br] = lift_system(a, b);
  const LinearSystem base(lifted.a_real, br, 0.0);
  const LinearSystem sys = base.with_epsilon(base.residual_norm() + 1.0);
  const auto all = entrywise_bounds(sys);
  for (Index v = 0; v < 3; ++v) {
    for (Part p : {Part::Real, Part::Imag}) {
      const EntryBound direct = functional_bound(sys, lifted_unit(lifted, v, p));
      const EntryBound& mapped = all[static_cast<std::size_t>(lifted.coordinate(v, p))];
      CHECK(direct.lower == doctest::Approx(mapped.lower).epsilon(1e-12));
      CHECK(direct.upper == doctest::Approx(mapped.upper).epsilon(1e-12));
    }
  }
}
