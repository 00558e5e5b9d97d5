#include "entrywise/complex_lift.hpp"

#include "entrywise/errors.hpp"

#include <fmt/format.h>

namespace entrywise {

Index LiftedSystem::coordinate(Index voxel, Part part) const {
  if (voxel < 0 || voxel >= complex_cols) {
    throw Error(ErrorCode::IndexOutOfRange,
                fmt::format("voxel {} outside [0, {})", voxel, complex_cols));
  }
  return part == Part::Real ? voxel : complex_cols + voxel;
}

std::vector<std::pair<Index, Index>> LiftedSystem::index_map() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(complex_cols));
  for (Index i = 0; i < complex_cols; ++i) out.emplace_back(i, complex_cols + i);
  return out;
}

Matrix lift_matrix(const ComplexMatrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  Matrix out(2 * m, 2 * n);
  out.topLeftCorner(m, n) = a.real();
  out.topRightCorner(m, n) = -a.imag();
  out.bottomLeftCorner(m, n) = a.imag();
  out.bottomRightCorner(m, n) = a.real();
  return out;
}

Vector lift_vector(const ComplexVector& v) {
  Vector out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

ComplexVector unlift_vector(const Vector& v) {
  if (v.size() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("lifted vector has odd length {}", v.size()));
  }
  const Index n = v.size() / 2;
  ComplexVector out(n);
  out.real() = v.head(n);
  out.imag() = v.tail(n);
  return out;
}

std::pair<LiftedSystem, Vector> lift_system(const ComplexMatrix& a, const ComplexVector& b) {
  if (b.size() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("data has length {}, matrix has {} rows", b.size(), a.rows()));
  }
  LiftedSystem sys;
  sys.a_real = lift_matrix(a);
  sys.complex_rows = a.rows();
  sys.complex_cols = a.cols();
  return {std::move(sys), lift_vector(b)};
}

ComplexVector unlift_solution(const LiftedSystem& sys, const Vector& x_real) {
  if (x_real.size() != 2 * sys.complex_cols) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("lifted solution has length {}, expected {}", x_real.size(),
                            2 * sys.complex_cols));
  }
  return unlift_vector(x_real);
}

Vector lifted_unit(const LiftedSystem& sys, Index voxel, Part part) {
  Vector e = Vector::Zero(2 * sys.complex_cols);
  e(sys.coordinate(voxel, part)) = 1.0;
  return e;
}

}  // namespace entrywise
