#pragma once

#include "entrywise/bounds.hpp"
#include "entrywise/json_io.hpp"
#include "entrywise/manifest.hpp"
#include "entrywise/sense.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entrywise::sense {

enum class EpsilonMode { Heuristic, Oracle, Fixed };

std::string_view to_string(EpsilonMode mode);

/// SENSE demonstration settings. JSON layout (all keys optional):
///   grid {h, w}, phantom {preset, seed}, coils {l, kind, phase_fold, seed, tv_cap},
///   pattern {accel, acs}, noise {sigma, seed}, epsilon {mode, value},
///   extremal {column}, rank_rtol, outputs {dir, pgm}
struct SenseConfig {
  Index h = 32;
  Index w = 32;
  std::string phantom = "shepp-like";
  std::uint64_t phantom_seed = 1;
  int coils = 8;
  CoilKind coil_kind = CoilKind::Gaussian;
  bool phase_fold = true;
  std::uint64_t coil_seed = 2;
  double tv_cap = kDefaultCoilTvCap;
  int accel = 4;
  int acs = 6;
  double noise_sigma = 0.01;
  std::uint64_t noise_seed = 3;
  EpsilonMode epsilon_mode = EpsilonMode::Heuristic;
  double epsilon_value = 0.0;  // Fixed only
  std::optional<Index> extremal_column;  // defaults to w / 2
  double rank_rtol = RankTolerance::kDefault;
  std::string out_dir;
  bool pgm = false;

  Index extremal_col() const { return extremal_column.value_or(w / 2); }
};

// Throws ConfigError naming every offending key.
SenseConfig parse_sense_config(const Json& j);
// Complete echo including defaults; parse_sense_config(to_json(c)) == c.
Json to_json(const SenseConfig& c);

struct Scene {
  Phantom phantom;
  CoilSet coils;
  SamplingPattern pattern;
};

Scene build_scene(const SenseConfig& c);

struct RowReport {
  Index row = 0;
  Index voxels = 0;
  Index lifted_rows = 0;
  Index rank = 0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  std::optional<double> kappa;
  double epsilon = 0.0;
  double residual_norm = 0.0;
  std::optional<double> lambda;
};

struct ExtremalCheck {
  double achieved = 0.0;
  double expected = 0.0;
  double residual_norm = 0.0;
};

struct ExtremalRow {
  Index row = 0;
  double epsilon = 0.0;
  std::optional<ExtremalCheck> upper;  // set when the column voxel is supported and finite
  std::optional<ExtremalCheck> lower;
  double residual_norm = 0.0;  // of the row used when no target applies
};

/// Voxel maps on the image grid (off-support voxels hold 0) plus per-row
/// diagnostics. Map names: see map_names().
struct BoundMaps {
  Index h = 0;
  Index w = 0;
  std::vector<std::pair<std::string, Matrix>> maps;
  std::vector<RowReport> rows;
  std::vector<Index> skipped_rows;
  Index skipped_pairs = 0;
  Index extremal_column = 0;
  std::vector<ExtremalRow> extremal;
  Index finite = 0;
  Index unbounded = 0;
  Index infeasible = 0;
  std::vector<Index> kept_lines;
  Json timings = Json::object();

  const Matrix& map(std::string_view name) const;
};

const std::vector<std::string>& map_names();

// Status codes used in the "status" map.
inline constexpr double kStatusOff = 0.0;
inline constexpr double kStatusFinite = 1.0;
inline constexpr double kStatusUnbounded = 2.0;
inline constexpr double kStatusInfeasible = 3.0;

BoundMaps run_pipeline(const SenseConfig& c, unsigned threads = 1);

// Writes <name>.csv per map (and <name>.pgm when enabled) plus manifest.json.
RunManifest write_pipeline_outputs(const BoundMaps& maps, const SenseConfig& c,
                                   const std::filesystem::path& dir);

// Binary 8-bit PGM, values mapped linearly from [lo, hi] to [0, 255].
std::string render_pgm(const Matrix& m, double lo, double hi);

}  // namespace entrywise::sense
