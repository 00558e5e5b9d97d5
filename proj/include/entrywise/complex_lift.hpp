#pragma once

#include "entrywise/csv_io.hpp"
#include "entrywise/linalg.hpp"

#include <utility>
#include <vector>

namespace entrywise {

enum class Part { Real, Imag };

/// Real form of a complex system in blocked layout:
///   [Re A  -Im A] [Re x]   [Re b]
///   [Im A   Re A] [Im x] = [Im b]
/// Complex unknown i maps to real coordinates i (real part) and N + i
/// (imaginary part).
struct LiftedSystem {
  Matrix a_real;  // 2M x 2N
  Index complex_rows = 0;
  Index complex_cols = 0;

  Index coordinate(Index voxel, Part part) const;
  std::vector<std::pair<Index, Index>> index_map() const;
};

Matrix lift_matrix(const ComplexMatrix& a);
Vector lift_vector(const ComplexVector& v);
ComplexVector unlift_vector(const Vector& v);

std::pair<LiftedSystem, Vector> lift_system(const ComplexMatrix& a, const ComplexVector& b);

ComplexVector unlift_solution(const LiftedSystem& sys, const Vector& x_real);

// The real unit vector selecting one part of complex unknown `voxel`.
Vector lifted_unit(const LiftedSystem& sys, Index voxel, Part part);

}  // namespace entrywise
