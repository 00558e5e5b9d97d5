#pragma once

#include "entrywise/complex_lift.hpp"
#include "entrywise/csv_io.hpp"
#include "entrywise/linalg.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace entrywise::sense {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Complex image on an h x w grid. Voxels outside `support` are exactly zero
/// and on-support magnitudes lie in (0, 1].
struct Phantom {
  ComplexMatrix grid;
  Mask support;

  Index rows() const noexcept { return grid.rows(); }
  Index cols() const noexcept { return grid.cols(); }
  Index support_count() const { return support.count(); }
};

// Presets: "shepp-like" (piecewise-constant ellipses) and "smooth-blobs".
Phantom make_phantom(std::string_view preset, Index h, Index w, std::uint64_t seed);

enum class CoilKind { Gaussian, Uniform };

std::string_view to_string(CoilKind kind);
CoilKind parse_coil_kind(std::string_view name);

inline constexpr double kDefaultCoilTvCap = 0.25;

struct CoilSet {
  std::vector<ComplexMatrix> profiles;
  bool phase_folded = false;

  int channels() const noexcept { return static_cast<int>(profiles.size()); }
};

// Smooth complex Gaussian-bump profiles placed around the field of view, or
// constant unit profiles for CoilKind::Uniform. Throws ConfigError if any
// profile's mean total variation exceeds tv_cap.
CoilSet make_coils(int channels, Index h, Index w, std::uint64_t seed,
                   CoilKind kind = CoilKind::Gaussian, double tv_cap = kDefaultCoilTvCap);

// Mean absolute forward difference over both image axes.
double mean_total_variation(const ComplexMatrix& profile);

// Multiplies the phantom's phase into every profile, which makes the
// effective unknown the (real) magnitude image.
CoilSet fold_phase(CoilSet coils, const Phantom& phantom);

// The image the forward model actually sees: |x| for phase-folded coils,
// x otherwise.
ComplexMatrix effective_image(const Phantom& phantom, const CoilSet& coils);

/// Phase-encoding lines kept along the row direction: every accel-th line
/// plus `acs` contiguous lines around the centre of k-space.
struct SamplingPattern {
  std::vector<Index> kept;
  Index length = 0;
  int accel = 1;
  int acs = 0;
};

SamplingPattern make_sampling_pattern(Index length, int accel, int acs);

// Centered unitary DFT: F(k, n) = exp(-2 pi i (k - c)(n - c) / L) / sqrt(L),
// c = L / 2.
ComplexMatrix centered_dft(Index length);

struct Acquisition {
  std::vector<ComplexMatrix> kspace;  // per coil, h x |kept| (readout x phase encode)
  std::vector<ComplexMatrix> noise;   // the noise that was added, same layout
  double noise_sigma = 0.0;
};

// b_l = F S_l x + n_l with i.i.d. circular complex Gaussian noise whose real
// and imaginary parts each have standard deviation noise_sigma.
Acquisition simulate_acquisition(const Phantom& phantom, const CoilSet& coils,
                                 const SamplingPattern& pattern, double noise_sigma,
                                 std::uint64_t seed);

// Unitary inverse DFT along the fully sampled readout axis; row h of the
// result only depends on image row h.
std::vector<ComplexMatrix> to_hybrid(const std::vector<ComplexMatrix>& kspace);

// Stacks row `row` of every coil's hybrid data: entry (l, k) at l * |kept| + k.
ComplexVector row_data(const std::vector<ComplexMatrix>& hybrid, Index row);

/// The support-masked, real-lifted system for one image row.
struct RowSystem {
  Index row = 0;
  std::vector<Index> columns;  // image columns of the supported voxels, ascending
  ComplexMatrix a_complex;     // (L |kept|) x |columns|
  LiftedSystem lifted;
  SvdFactors factors;

  Index voxels() const noexcept { return static_cast<Index>(columns.size()); }
  // Lifted column c -> (image column, part).
  std::pair<Index, Part> col_map(Index lifted_col) const;
};

// One RowSystem per image row with at least one supported voxel.
std::vector<RowSystem> build_row_systems(const Phantom& phantom, const CoilSet& coils,
                                         const SamplingPattern& pattern,
                                         RankTolerance tol = RankTolerance{},
                                         unsigned threads = 1);

// The undecoupled 2-D system over all supported voxels (row-major voxel
// order) and matching k-space data, used to validate the row decoupling.
ComplexMatrix monolithic_matrix(const Phantom& phantom, const CoilSet& coils,
                                const SamplingPattern& pattern);
ComplexVector monolithic_data(const std::vector<ComplexMatrix>& kspace);

}  // namespace entrywise::sense
