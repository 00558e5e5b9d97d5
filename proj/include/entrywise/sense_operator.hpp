#pragma once

#include "entrywise/matfree.hpp"
#include "entrywise/sense.hpp"

namespace entrywise::sense {

/// Real-lifted 2-D SENSE forward model over the supported voxels, applied
/// with dense DFT factors instead of an assembled matrix. Unknown layout is
/// [Re; Im] over supported voxels in row-major order; data layout is the
/// lift of monolithic_data().
class SenseOperator final : public LinearOperator {
 public:
  SenseOperator(const Phantom& phantom, const CoilSet& coils, const SamplingPattern& pattern);

  Index rows() const override { return 2 * complex_rows_; }
  Index cols() const override { return 2 * voxels_; }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;

  // (row, column) of supported voxel v.
  std::pair<Index, Index> voxel_position(Index v) const;
  Index voxels() const noexcept { return voxels_; }

 private:
  ComplexMatrix scatter(const Vector& x) const;

  Index h_ = 0, w_ = 0, voxels_ = 0, complex_rows_ = 0;
  std::vector<std::pair<Index, Index>> positions_;
  std::vector<ComplexMatrix> coils_;
  ComplexMatrix fh_, fk_;
};

}  // namespace entrywise::sense
