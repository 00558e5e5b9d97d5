#include "entrywise/matfree.hpp"

#include "entrywise/errors.hpp"
#include "entrywise/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace entrywise {

namespace {

void require_length(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} has length {}, expected {}", what, x.size(), n));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector draw_probe(Index n, ProbeKind kind, std::mt19937_64& rng) {
  Vector z(n);
  if (kind == ProbeKind::Gaussian) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index i = 0; i < n; ++i) z(i) = g(rng);
  } else {
    for (Index i = 0; i < n; ++i) z(i) = (rng() & 1u) ? 1.0 : -1.0;
  }
  return z;
}

constexpr int kSamplesPerBlock = 32;

}  // namespace

DenseOperator::DenseOperator(Matrix a) : a_(std::move(a)) { require_finite(a_, "matrix"); }

Vector DenseOperator::apply(const Vector& x) const {
  require_length(x, a_.cols(), "operator input");
  return a_ * x;
}

Vector DenseOperator::apply_transpose(const Vector& y) const {
  require_length(y, a_.rows(), "operator adjoint input");
  return a_.transpose() * y;
}

FunctionOperator::FunctionOperator(Index rows, Index cols, Map apply, Map apply_transpose)
    : rows_(rows), cols_(cols), apply_(std::move(apply)),
      apply_transpose_(std::move(apply_transpose)) {
  if (rows < 1 || cols < 1 || !apply_ || !apply_transpose_) {
    throw Error(ErrorCode::InvalidInput, "function operator needs dimensions and both maps");
  }
}

Vector FunctionOperator::apply(const Vector& x) const {
  require_length(x, cols_, "operator input");
  return apply_(x);
}

Vector FunctionOperator::apply_transpose(const Vector& y) const {
  require_length(y, rows_, "operator adjoint input");
  return apply_transpose_(y);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

double adjoint_mismatch(const LinearOperator& op, int probes, std::uint64_t seed) {
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
    const Vector x = draw_probe(op.cols(), ProbeKind::Gaussian, rng);
    const Vector y = draw_probe(op.rows(), ProbeKind::Gaussian, rng);
    const double gap = std::abs(op.apply(x).dot(y) - x.dot(op.apply_transpose(y)));
    worst = std::max(worst, gap / (x.norm() * y.norm()));
  }
  return worst;
}

double power_iteration_sigma1(const LinearOperator& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw Error(ErrorCode::InvalidInput, "power iteration needs iters >= 1");
  std::mt19937_64 rng(substream_seed(seed, 0));
  Vector x = draw_probe(op.cols(), ProbeKind::Gaussian, rng);
  x.normalize();
  for (int k = 0; k < iters; ++k) {
    Vector y = op.apply_transpose(op.apply(x));
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }
  // ||A x|| with ||x|| = 1 is a Rayleigh quotient, hence a lower bound.
  return op.apply(x).norm();
}

// ---------------------------------------------------------------------------
// Landweber

double LandweberConfig::step() const {
  if (tau != 0.0) return tau;
  if (!(sigma1_estimate > 0.0)) {
    throw Error(ErrorCode::InvalidStep, "default step needs a positive sigma1 estimate");
  }
  return 1.0 / (sigma1_estimate * sigma1_estimate);
}

void validate(const LandweberConfig& cfg) {
  if (!(cfg.sigma1_estimate > 0.0)) {
    throw Error(ErrorCode::InvalidStep, "sigma1 estimate must be positive");
  }
  const double tau = cfg.step();
  const double limit = 2.0 / (cfg.sigma1_estimate * cfg.sigma1_estimate);
  if (!(tau > 0.0 && tau < limit)) {
    throw Error(ErrorCode::InvalidStep,
                fmt::format("step {} outside (0, {}) for sigma1 = {}", tau, limit,
                            cfg.sigma1_estimate));
  }
  if (cfg.max_iters < 1) throw Error(ErrorCode::InvalidInput, "max_iters must be >= 1");
  if (!(cfg.rel_tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "rel_tol must be >= 0");
  if (cfg.sigma_r && !(*cfg.sigma_r > 0.0 && *cfg.sigma_r <= cfg.sigma1_estimate)) {
    throw Error(ErrorCode::InvalidInput, "sigma_r must lie in (0, sigma1]");
  }
}

int rate_bound_iterations(double tau, double sigma1, double sigma_r, double tol) {
  const double rho = std::max(std::abs(1.0 - tau * sigma1 * sigma1),
                              std::abs(1.0 - tau * sigma_r * sigma_r));
  if (rho >= 1.0) throw Error(ErrorCode::InvalidStep, "step does not contract every mode");
  if (rho == 0.0 || tol >= 1.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(rho))));
}

LandweberResult landweber_pinv(const LinearOperator& op, const Vector& m,
                               const LandweberConfig& cfg) {
  validate(cfg);
  require_length(m, op.rows(), "data vector");
  const double tau = cfg.step();
  const int rate_iters =
      cfg.sigma_r ? rate_bound_iterations(tau, cfg.sigma1_estimate, *cfg.sigma_r, cfg.rate_tol)
                  : 0;

  LandweberResult out;
  out.x = Vector::Zero(op.cols());
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vector update = tau * op.apply_transpose(op.apply(out.x) - m);
    out.x -= update;
    out.iterations = k;
    if (update.norm() <= cfg.rel_tol * out.x.norm()) {
      out.converged = true;
      out.stop = LandweberStop::UpdateTolerance;
      return out;
    }
    if (rate_iters > 0 && k >= rate_iters) {
      out.converged = true;
      out.stop = LandweberStop::RateBound;
      return out;
    }
  }
  out.stop = LandweberStop::MaxIterations;
  return out;
}

// ---------------------------------------------------------------------------
// Stochastic diagonal estimator

std::string_view to_string(ProbeKind kind) {
  return kind == ProbeKind::Gaussian ? "gaussian" : "rademacher";
}

ProbeKind parse_probe_kind(std::string_view name) {
  if (name == "gaussian") return ProbeKind::Gaussian;
  if (name == "rademacher") return ProbeKind::Rademacher;
  throw Error(ErrorCode::InvalidInput, fmt::format("unknown probe kind '{}'", name));
}

DiagEstimate stochastic_diag(const LinearOperator& op, int samples, ProbeKind probe_kind,
                             std::uint64_t seed, const LandweberConfig& cfg, unsigned threads) {
  if (samples < 1) throw Error(ErrorCode::InvalidInput, "need at least one sample");
  validate(cfg);

  const int blocks = (samples + kSamplesPerBlock - 1) / kSamplesPerBlock;
  std::vector<Vector> block_sums(static_cast<std::size_t>(blocks));
  std::vector<std::vector<int>> block_flagged(static_cast<std::size_t>(blocks));

  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t blk) {
    Vector sum = Vector::Zero(op.cols());
    const int first = static_cast<int>(blk) * kSamplesPerBlock;
    const int last = std::min(samples, first + kSamplesPerBlock);
    for (int s = first; s < last; ++s) {
      std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(s)));
      const Vector z = draw_probe(op.rows(), probe_kind, rng);
      const LandweberResult r = landweber_pinv(op, z, cfg);
      if (!r.converged) {
        block_flagged[blk].push_back(s);
        continue;
      }
      sum += r.x.cwiseAbs2();
    }
    block_sums[blk] = std::move(sum);
  });

  DiagEstimate out;
  out.samples = samples;
  out.seed = seed;
  out.probe_kind = probe_kind;
  Vector total = Vector::Zero(op.cols());
  for (int b = 0; b < blocks; ++b) {
    total += block_sums[static_cast<std::size_t>(b)];
    const auto& fl = block_flagged[static_cast<std::size_t>(b)];
    out.flagged.insert(out.flagged.end(), fl.begin(), fl.end());
  }
  out.used_samples = samples - static_cast<int>(out.flagged.size());
  if (out.used_samples == 0) {
    throw Error(ErrorCode::NonConvergence,
                fmt::format("none of the {} Landweber runs converged", samples));
  }
  out.values = total / static_cast<double>(out.used_samples);
  return out;
}

}  // namespace entrywise
