#include "entrywise/sense.hpp"

#include "entrywise/errors.hpp"
#include "entrywise/matfree.hpp"
#include "entrywise/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

namespace entrywise::sense {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Pixel centres in (-1, 1).
double coord(Index i, Index n) { return (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n) - 1.0; }

struct Ellipse {
  double cx, cy, ax, ay, angle, value;

  bool contains(double x, double y) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = x - cx, dy = y - cy;
    const double u = (c * dx + s * dy) / ax;
    const double v = (-s * dx + c * dy) / ay;
    return u * u + v * v <= 1.0;
  }
};

void check_grid(Index h, Index w) {
  if (h < 8 || w < 8) {
    throw Error(ErrorCode::InvalidInput, "grid must be at least 8x8");
  }
}

}  // namespace

Phantom make_phantom(std::string_view preset, Index h, Index w, std::uint64_t seed) {
  check_grid(h, w);
  std::mt19937_64 rng(substream_seed(seed, 0));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto jitter = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  const Ellipse outer{0.0, 0.0, jitter(0.74, 0.82), jitter(0.84, 0.9), 0.0, 1.0};
  Matrix mag = Matrix::Zero(h, w);
  Mask support = Mask::Constant(h, w, false);

  if (preset == "shepp-like") {
    const Ellipse inner{0.0, -0.02, outer.ax - 0.1, outer.ay - 0.1, 0.0, 0.35};
    std::vector<Ellipse> features = {
        {jitter(-0.35, -0.2), jitter(-0.1, 0.1), jitter(0.12, 0.2), jitter(0.3, 0.4), jitter(-0.4, -0.2), 0.55},
        {jitter(0.2, 0.35), jitter(-0.1, 0.1), jitter(0.1, 0.16), jitter(0.25, 0.35), jitter(0.2, 0.4), 0.7},
        {jitter(-0.1, 0.1), jitter(0.35, 0.5), jitter(0.12, 0.2), jitter(0.1, 0.15), 0.0, 0.85},
        {jitter(-0.1, 0.1), jitter(-0.55, -0.4), jitter(0.08, 0.12), jitter(0.08, 0.12), 0.0, 0.2},
    };
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        const double y = coord(i, h), x = coord(j, w);
        if (!outer.contains(x, y)) continue;
        double v = inner.contains(x, y) ? inner.value : outer.value;
        for (const auto& e : features) {
          if (inner.contains(x, y) && e.contains(x, y)) v = e.value;
        }
        support(i, j) = true;
        mag(i, j) = v;
      }
    }
  } else if (preset == "smooth-blobs") {
    struct Blob {
      double cx, cy, s, a;
    };
    std::vector<Blob> blobs;
    for (int k = 0; k < 4; ++k) {
      blobs.push_back({jitter(-0.45, 0.45), jitter(-0.5, 0.5), jitter(0.15, 0.35), jitter(0.4, 1.0)});
    }
    double peak = 0.0;
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        const double y = coord(i, h), x = coord(j, w);
        if (!outer.contains(x, y)) continue;
        double v = 0.15;
        for (const auto& b : blobs) {
          const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
          v += b.a * std::exp(-d2 / (2.0 * b.s * b.s));
        }
        support(i, j) = true;
        mag(i, j) = v;
        peak = std::max(peak, v);
      }
    }
    if (peak > 0.0) mag /= peak;
  } else {
    throw Error(ErrorCode::UnknownPreset, "unknown phantom preset '" + std::string(preset) +
                                              "' (expected shepp-like or smooth-blobs)");
  }

  // Slowly varying phase, as from B0 inhomogeneity.
  const double p0 = jitter(-kPi / 4, kPi / 4);
  const double px = jitter(-kPi / 4, kPi / 4);
  const double py = jitter(-kPi / 4, kPi / 4);
  const double pxy = jitter(-kPi / 8, kPi / 8);

  Phantom ph;
  ph.grid = ComplexMatrix::Zero(h, w);
  ph.support = support;
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      if (!support(i, j)) continue;
      const double y = coord(i, h), x = coord(j, w);
      const double m = std::clamp(mag(i, j), 0.05, 1.0);
      ph.grid(i, j) = std::polar(m, p0 + px * x + py * y + pxy * x * y);
    }
  }
  return ph;
}

std::string_view to_string(CoilKind kind) {
  return kind == CoilKind::Gaussian ? "gaussian" : "uniform";
}

CoilKind parse_coil_kind(std::string_view name) {
  if (name == "gaussian") return CoilKind::Gaussian;
  if (name == "uniform") return CoilKind::Uniform;
  throw Error(ErrorCode::ConfigError,
              "unknown coil kind '" + std::string(name) + "' (expected gaussian or uniform)");
}

double mean_total_variation(const ComplexMatrix& p) {
  double total = 0.0;
  Index terms = 0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      if (i + 1 < p.rows()) {
        total += std::abs(p(i + 1, j) - p(i, j));
        ++terms;
      }
      if (j + 1 < p.cols()) {
        total += std::abs(p(i, j + 1) - p(i, j));
        ++terms;
      }
    }
  }
  return terms == 0 ? 0.0 : total / static_cast<double>(terms);
}

CoilSet make_coils(int channels, Index h, Index w, std::uint64_t seed, CoilKind kind,
                   double tv_cap) {
  check_grid(h, w);
  if (channels < 1) throw Error(ErrorCode::ConfigError, "coil count must be at least 1");
  if (!(tv_cap > 0.0)) throw Error(ErrorCode::ConfigError, "coil tv_cap must be positive");

  CoilSet set;
  if (kind == CoilKind::Uniform) {
    set.profiles.assign(static_cast<std::size_t>(channels), ComplexMatrix::Ones(h, w));
    return set;
  }

  std::mt19937_64 rng(substream_seed(seed, 1));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double width = 0.9;
  for (int l = 0; l < channels; ++l) {
    const double theta = 2.0 * kPi * (l + 0.2 * (u01(rng) - 0.5)) / channels;
    const double radius = 1.1 + 0.1 * u01(rng);
    const double cx = radius * std::cos(theta), cy = radius * std::sin(theta);
    const double phase0 = 2.0 * kPi * u01(rng);
    const double ramp = kPi / 4 * u01(rng);
    const double ramp_dir = 2.0 * kPi * u01(rng);

    ComplexMatrix p(h, w);
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        const double y = coord(i, h), x = coord(j, w);
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        const double phase =
            phase0 + ramp * (x * std::cos(ramp_dir) + y * std::sin(ramp_dir));
        p(i, j) = std::polar(std::exp(-d2 / (2.0 * width * width)), phase);
      }
    }
    const double tv = mean_total_variation(p);
    if (tv > tv_cap) {
      throw Error(ErrorCode::ConfigError,
                  "coil " + std::to_string(l) + " total variation " + std::to_string(tv) +
                      " exceeds tv_cap " + std::to_string(tv_cap) + "; use a finer grid");
    }
    set.profiles.push_back(std::move(p));
  }
  return set;
}

CoilSet fold_phase(CoilSet coils, const Phantom& phantom) {
  if (coils.phase_folded) return coils;
  for (auto& p : coils.profiles) {
    if (p.rows() != phantom.rows() || p.cols() != phantom.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "coil profile and phantom grids differ");
    }
    for (Index i = 0; i < p.rows(); ++i) {
      for (Index j = 0; j < p.cols(); ++j) {
        const cd x = phantom.grid(i, j);
        if (x != cd(0.0, 0.0)) p(i, j) *= x / std::abs(x);
      }
    }
  }
  coils.phase_folded = true;
  return coils;
}

ComplexMatrix effective_image(const Phantom& phantom, const CoilSet& coils) {
  if (!coils.phase_folded) return phantom.grid;
  return phantom.grid.cwiseAbs().cast<cd>();
}

SamplingPattern make_sampling_pattern(Index length, int accel, int acs) {
  if (length < 1) throw Error(ErrorCode::ConfigError, "sampling length must be positive");
  if (accel < 1) throw Error(ErrorCode::ConfigError, "accel must be at least 1");
  if (acs < 0 || acs > length) {
    throw Error(ErrorCode::ConfigError, "acs must lie in [0, " + std::to_string(length) + "]");
  }
  std::set<Index> kept;
  for (Index k = 0; k < length; k += accel) kept.insert(k);
  const Index start = length / 2 - acs / 2;
  for (Index k = 0; k < acs; ++k) kept.insert(start + k);

  SamplingPattern p;
  p.kept.assign(kept.begin(), kept.end());
  p.length = length;
  p.accel = accel;
  p.acs = acs;
  return p;
}

ComplexMatrix centered_dft(Index length) {
  ComplexMatrix f(length, length);
  const Index c = length / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(length));
  for (Index k = 0; k < length; ++k) {
    for (Index n = 0; n < length; ++n) {
      // Reduce the product modulo length before forming the angle.
      const Index prod = ((k - c) * (n - c)) % length;
      f(k, n) = std::polar(scale, -2.0 * kPi * static_cast<double>(prod) / static_cast<double>(length));
    }
  }
  return f;
}

namespace {

ComplexMatrix kept_rows(const ComplexMatrix& f, const SamplingPattern& pattern) {
  ComplexMatrix out(static_cast<Index>(pattern.kept.size()), f.cols());
  for (std::size_t k = 0; k < pattern.kept.size(); ++k) out.row(static_cast<Index>(k)) = f.row(pattern.kept[k]);
  return out;
}

void check_coils(const Phantom& phantom, const CoilSet& coils, const SamplingPattern& pattern) {
  if (coils.profiles.empty()) throw Error(ErrorCode::ConfigError, "no coil profiles");
  for (const auto& p : coils.profiles) {
    if (p.rows() != phantom.rows() || p.cols() != phantom.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "coil profile and phantom grids differ");
    }
  }
  if (pattern.length != phantom.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "sampling pattern length " + std::to_string(pattern.length) +
                                              " does not match image width " +
                                              std::to_string(phantom.cols()));
  }
}

}  // namespace

Acquisition simulate_acquisition(const Phantom& phantom, const CoilSet& coils,
                                 const SamplingPattern& pattern, double noise_sigma,
                                 std::uint64_t seed) {
  check_coils(phantom, coils, pattern);
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::ConfigError, "noise sigma must be finite and non-negative");
  }
  const ComplexMatrix x = effective_image(phantom, coils);
  const ComplexMatrix fh = centered_dft(phantom.rows());
  const ComplexMatrix fk = kept_rows(centered_dft(phantom.cols()), pattern);

  Acquisition acq;
  acq.noise_sigma = noise_sigma;
  for (int l = 0; l < coils.channels(); ++l) {
    const ComplexMatrix img = coils.profiles[static_cast<std::size_t>(l)].cwiseProduct(x);
    ComplexMatrix k = fh * img * fk.transpose();
    ComplexMatrix n(k.rows(), k.cols());
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(l)));
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index j = 0; j < n.cols(); ++j) {
      for (Index i = 0; i < n.rows(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        n(i, j) = cd(noise_sigma * re, noise_sigma * im);
      }
    }
    acq.kspace.push_back(k + n);
    acq.noise.push_back(std::move(n));
  }
  return acq;
}

std::vector<ComplexMatrix> to_hybrid(const std::vector<ComplexMatrix>& kspace) {
  std::vector<ComplexMatrix> out;
  if (kspace.empty()) return out;
  const ComplexMatrix fh_adj = centered_dft(kspace.front().rows()).adjoint();
  out.reserve(kspace.size());
  for (const auto& k : kspace) out.push_back(fh_adj * k);
  return out;
}

ComplexVector row_data(const std::vector<ComplexMatrix>& hybrid, Index row) {
  if (hybrid.empty()) return {};
  const Index kept = hybrid.front().cols();
  ComplexVector b(static_cast<Index>(hybrid.size()) * kept);
  for (std::size_t l = 0; l < hybrid.size(); ++l) {
    if (row < 0 || row >= hybrid[l].rows()) {
      throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(row) + " out of range");
    }
    b.segment(static_cast<Index>(l) * kept, kept) = hybrid[l].row(row).transpose();
  }
  return b;
}

std::pair<Index, Part> RowSystem::col_map(Index lifted_col) const {
  const Index n = voxels();
  if (lifted_col < 0 || lifted_col >= 2 * n) {
    throw Error(ErrorCode::IndexOutOfRange, "lifted column " + std::to_string(lifted_col) + " out of range");
  }
  return lifted_col < n ? std::pair{columns[static_cast<std::size_t>(lifted_col)], Part::Real}
                        : std::pair{columns[static_cast<std::size_t>(lifted_col - n)], Part::Imag};
}

std::vector<RowSystem> build_row_systems(const Phantom& phantom, const CoilSet& coils,
                                         const SamplingPattern& pattern, RankTolerance tol,
                                         unsigned threads) {
  check_coils(phantom, coils, pattern);
  const ComplexMatrix fk = kept_rows(centered_dft(phantom.cols()), pattern);
  const Index kept = fk.rows();

  std::vector<Index> rows;
  for (Index h = 0; h < phantom.rows(); ++h) {
    if (phantom.support.row(h).any()) rows.push_back(h);
  }
  std::vector<RowSystem> out(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    RowSystem rs;
    rs.row = rows[idx];
    for (Index j = 0; j < phantom.cols(); ++j) {
      if (phantom.support(rs.row, j)) rs.columns.push_back(j);
    }
    const Index n = rs.voxels();
    rs.a_complex.resize(coils.channels() * kept, n);
    for (int l = 0; l < coils.channels(); ++l) {
      const auto& s = coils.profiles[static_cast<std::size_t>(l)];
      for (Index c = 0; c < n; ++c) {
        const Index col = rs.columns[static_cast<std::size_t>(c)];
        rs.a_complex.block(l * kept, c, kept, 1) = fk.col(col) * s(rs.row, col);
      }
    }
    rs.lifted.a_real = lift_matrix(rs.a_complex);
    rs.lifted.complex_rows = rs.a_complex.rows();
    rs.lifted.complex_cols = n;
    rs.factors = svd_truncated(rs.lifted.a_real, tol);
    out[idx] = std::move(rs);
  });
  return out;
}

ComplexMatrix monolithic_matrix(const Phantom& phantom, const CoilSet& coils,
                                const SamplingPattern& pattern) {
  check_coils(phantom, coils, pattern);
  const ComplexMatrix fh = centered_dft(phantom.rows());
  const ComplexMatrix fk = kept_rows(centered_dft(phantom.cols()), pattern);
  const Index h = phantom.rows(), kept = fk.rows();
  const Index m = coils.channels() * h * kept;

  ComplexMatrix a(m, phantom.support_count());
  Index v = 0;
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < phantom.cols(); ++j) {
      if (!phantom.support(i, j)) continue;
      for (int l = 0; l < coils.channels(); ++l) {
        const cd s = coils.profiles[static_cast<std::size_t>(l)](i, j);
        for (Index kh = 0; kh < h; ++kh) {
          a.block((l * h + kh) * kept, v, kept, 1) = fk.col(j) * (fh(kh, i) * s);
        }
      }
      ++v;
    }
  }
  return a;
}

ComplexVector monolithic_data(const std::vector<ComplexMatrix>& kspace) {
  if (kspace.empty()) return {};
  const Index h = kspace.front().rows(), kept = kspace.front().cols();
  ComplexVector b(static_cast<Index>(kspace.size()) * h * kept);
  for (std::size_t l = 0; l < kspace.size(); ++l) {
    for (Index kh = 0; kh < h; ++kh) {
      b.segment((static_cast<Index>(l) * h + kh) * kept, kept) = kspace[l].row(kh).transpose();
    }
  }
  return b;
}

}  // namespace entrywise::sense
