#include "entrywise/sense_operator.hpp"

#include "entrywise/errors.hpp"

#include <string>

namespace entrywise::sense {

SenseOperator::SenseOperator(const Phantom& phantom, const CoilSet& coils,
                             const SamplingPattern& pattern)
    : h_(phantom.rows()), w_(phantom.cols()), coils_(coils.profiles) {
  if (pattern.length != w_) {
    throw Error(ErrorCode::ShapeMismatch, "sampling pattern length does not match image width");
  }
  if (coils_.empty()) throw Error(ErrorCode::ConfigError, "no coil profiles");
  for (Index i = 0; i < h_; ++i) {
    for (Index j = 0; j < w_; ++j) {
      if (phantom.support(i, j)) positions_.emplace_back(i, j);
    }
  }
  voxels_ = static_cast<Index>(positions_.size());
  fh_ = centered_dft(h_);
  const ComplexMatrix fw = centered_dft(w_);
  fk_.resize(static_cast<Index>(pattern.kept.size()), w_);
  for (std::size_t k = 0; k < pattern.kept.size(); ++k) fk_.row(static_cast<Index>(k)) = fw.row(pattern.kept[k]);
  complex_rows_ = static_cast<Index>(coils_.size()) * h_ * fk_.rows();
}

std::pair<Index, Index> SenseOperator::voxel_position(Index v) const {
  if (v < 0 || v >= voxels_) throw Error(ErrorCode::IndexOutOfRange, "voxel " + std::to_string(v) + " out of range");
  return positions_[static_cast<std::size_t>(v)];
}

ComplexMatrix SenseOperator::scatter(const Vector& x) const {
  ComplexMatrix img = ComplexMatrix::Zero(h_, w_);
  for (Index v = 0; v < voxels_; ++v) {
    const auto [i, j] = positions_[static_cast<std::size_t>(v)];
    img(i, j) = {x(v), x(voxels_ + v)};
  }
  return img;
}

Vector SenseOperator::apply(const Vector& x) const {
  if (x.size() != cols()) throw Error(ErrorCode::DimensionMismatch, "SENSE operator input has wrong length");
  const ComplexMatrix img = scatter(x);
  const Index kept = fk_.rows();
  ComplexVector y(complex_rows_);
  for (std::size_t l = 0; l < coils_.size(); ++l) {
    const ComplexMatrix k = fh_ * coils_[l].cwiseProduct(img) * fk_.transpose();
    for (Index kh = 0; kh < h_; ++kh) {
      y.segment((static_cast<Index>(l) * h_ + kh) * kept, kept) = k.row(kh).transpose();
    }
  }
  return lift_vector(y);
}

Vector SenseOperator::apply_transpose(const Vector& y_real) const {
  if (y_real.size() != rows()) throw Error(ErrorCode::DimensionMismatch, "SENSE operator input has wrong length");
  const ComplexVector y = unlift_vector(y_real);
  const Index kept = fk_.rows();
  ComplexMatrix acc = ComplexMatrix::Zero(h_, w_);
  ComplexMatrix k(h_, kept);
  for (std::size_t l = 0; l < coils_.size(); ++l) {
    for (Index kh = 0; kh < h_; ++kh) {
      k.row(kh) = y.segment((static_cast<Index>(l) * h_ + kh) * kept, kept).transpose();
    }
    const ComplexMatrix back = fh_.adjoint() * k * fk_.conjugate();
    acc += coils_[l].conjugate().cwiseProduct(back);
  }
  Vector x(cols());
  for (Index v = 0; v < voxels_; ++v) {
    const auto [i, j] = positions_[static_cast<std::size_t>(v)];
    x(v) = acc(i, j).real();
    x(voxels_ + v) = acc(i, j).imag();
  }
  return x;
}

}  // namespace entrywise::sense
