#include "entrywise/pipeline.hpp"

#include "entrywise/csv_io.hpp"
#include "entrywise/errors.hpp"
#include "entrywise/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace entrywise::sense {

std::string_view to_string(EpsilonMode mode) {
  switch (mode) {
    case EpsilonMode::Heuristic: return "heuristic";
    case EpsilonMode::Oracle: return "oracle";
    case EpsilonMode::Fixed: return "fixed";
  }
  return "heuristic";
}

namespace {

// Collects every schema problem before reporting.
class ConfigReader {
 public:
  void check_keys(const Json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(prefix + key, "unknown key");
      }
    }
  }

  const Json* section(const Json& root, const char* key) {
    if (!root.contains(key)) return nullptr;
    const Json& s = root.at(key);
    if (!s.is_object()) {
      fail(key, "expected an object");
      return nullptr;
    }
    return &s;
  }

  template <typename T>
  void integer(const Json* obj, const std::string& path, const char* key, T& out, long long lo,
               long long hi) {
    if (!obj || !obj->contains(key)) return;
    const Json& v = obj->at(key);
    if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > hi) {
      fail(path + key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return;
    }
    out = static_cast<T>(v.get<long long>());
  }

  void seed(const Json* obj, const std::string& path, const char* key, std::uint64_t& out) {
    if (!obj || !obj->contains(key)) return;
    const Json& v = obj->at(key);
    if (!v.is_number_unsigned()) {
      fail(path + key, "expected a non-negative integer");
      return;
    }
    out = v.get<std::uint64_t>();
  }

  void number(const Json* obj, const std::string& path, const char* key, double& out, double lo,
              double hi, bool lo_open) {
    if (!obj || !obj->contains(key)) return;
    const Json& v = obj->at(key);
    const bool ok = v.is_number() && std::isfinite(v.get<double>()) &&
                    (lo_open ? v.get<double>() > lo : v.get<double>() >= lo) && v.get<double>() < hi;
    if (!ok) {
      fail(path + key, std::string("expected a number ") + (lo_open ? "> " : ">= ") + format_double(lo));
      return;
    }
    out = v.get<double>();
  }

  void boolean(const Json* obj, const std::string& path, const char* key, bool& out) {
    if (!obj || !obj->contains(key)) return;
    const Json& v = obj->at(key);
    if (!v.is_boolean()) {
      fail(path + key, "expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  bool string(const Json* obj, const std::string& path, const char* key, std::string& out) {
    if (!obj || !obj->contains(key)) return false;
    const Json& v = obj->at(key);
    if (!v.is_string()) {
      fail(path + key, "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  void fail(const std::string& key, const std::string& why) { errors_.push_back(key + " (" + why + ")"); }

  void finish() const {
    if (errors_.empty()) return;
    std::string msg = "invalid config: ";
    for (std::size_t i = 0; i < errors_.size(); ++i) msg += (i ? "; " : "") + errors_[i];
    throw Error(ErrorCode::ConfigError, msg);
  }

 private:
  std::vector<std::string> errors_;
};

constexpr long long kMaxGrid = 4096;

}  // namespace

SenseConfig parse_sense_config(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "invalid config: top level must be an object");
  SenseConfig c;
  ConfigReader r;
  r.check_keys(j, "", {"grid", "phantom", "coils", "pattern", "noise", "epsilon", "extremal",
                       "rank_rtol", "outputs"});

  if (const Json* s = r.section(j, "grid")) {
    r.check_keys(*s, "grid.", {"h", "w"});
    r.integer(s, "grid.", "h", c.h, 8, kMaxGrid);
    r.integer(s, "grid.", "w", c.w, 8, kMaxGrid);
  }
  if (const Json* s = r.section(j, "phantom")) {
    r.check_keys(*s, "phantom.", {"preset", "seed"});
    if (r.string(s, "phantom.", "preset", c.phantom) && c.phantom != "shepp-like" &&
        c.phantom != "smooth-blobs") {
      r.fail("phantom.preset", "expected shepp-like or smooth-blobs");
    }
    r.seed(s, "phantom.", "seed", c.phantom_seed);
  }
  if (const Json* s = r.section(j, "coils")) {
    r.check_keys(*s, "coils.", {"l", "kind", "phase_fold", "seed", "tv_cap"});
    r.integer(s, "coils.", "l", c.coils, 1, 1024);
    std::string kind;
    if (r.string(s, "coils.", "kind", kind)) {
      if (kind == "gaussian" || kind == "uniform") {
        c.coil_kind = parse_coil_kind(kind);
      } else {
        r.fail("coils.kind", "expected gaussian or uniform");
      }
    }
    r.boolean(s, "coils.", "phase_fold", c.phase_fold);
    r.seed(s, "coils.", "seed", c.coil_seed);
    r.number(s, "coils.", "tv_cap", c.tv_cap, 0.0, HUGE_VAL, true);
  }
  if (const Json* s = r.section(j, "pattern")) {
    r.check_keys(*s, "pattern.", {"accel", "acs"});
    r.integer(s, "pattern.", "accel", c.accel, 1, kMaxGrid);
    r.integer(s, "pattern.", "acs", c.acs, 0, kMaxGrid);
  }
  if (c.acs > c.w) r.fail("pattern.acs", "exceeds grid.w");
  if (const Json* s = r.section(j, "noise")) {
    r.check_keys(*s, "noise.", {"sigma", "seed"});
    r.number(s, "noise.", "sigma", c.noise_sigma, 0.0, HUGE_VAL, false);
    r.seed(s, "noise.", "seed", c.noise_seed);
  }
  if (const Json* s = r.section(j, "epsilon")) {
    r.check_keys(*s, "epsilon.", {"mode", "value"});
    std::string mode;
    if (r.string(s, "epsilon.", "mode", mode)) {
      if (mode == "heuristic") {
        c.epsilon_mode = EpsilonMode::Heuristic;
      } else if (mode == "oracle") {
        c.epsilon_mode = EpsilonMode::Oracle;
      } else if (mode == "fixed") {
        c.epsilon_mode = EpsilonMode::Fixed;
      } else {
        r.fail("epsilon.mode", "expected heuristic, oracle or fixed");
      }
    }
    r.number(s, "epsilon.", "value", c.epsilon_value, 0.0, HUGE_VAL, false);
    if (c.epsilon_mode == EpsilonMode::Fixed && !s->contains("value")) {
      r.fail("epsilon.value", "required when mode is fixed");
    }
  }
  if (const Json* s = r.section(j, "extremal")) {
    r.check_keys(*s, "extremal.", {"column"});
    Index col = 0;
    if (s->contains("column")) {
      r.integer(s, "extremal.", "column", col, 0, c.w - 1);
      c.extremal_column = col;
    }
  }
  if (j.contains("rank_rtol")) {
    const Json wrapper = {{"rank_rtol", j.at("rank_rtol")}};
    r.number(&wrapper, "", "rank_rtol", c.rank_rtol, 0.0, 1.0, true);
  }
  if (const Json* s = r.section(j, "outputs")) {
    r.check_keys(*s, "outputs.", {"dir", "pgm"});
    r.string(s, "outputs.", "dir", c.out_dir);
    r.boolean(s, "outputs.", "pgm", c.pgm);
  }
  r.finish();
  return c;
}

Json to_json(const SenseConfig& c) {
  Json j;
  j["grid"] = {{"h", c.h}, {"w", c.w}};
  j["phantom"] = {{"preset", c.phantom}, {"seed", c.phantom_seed}};
  j["coils"] = {{"l", c.coils},
                {"kind", std::string(to_string(c.coil_kind))},
                {"phase_fold", c.phase_fold},
                {"seed", c.coil_seed},
                {"tv_cap", json_number(c.tv_cap)}};
  j["pattern"] = {{"accel", c.accel}, {"acs", c.acs}};
  j["noise"] = {{"sigma", json_number(c.noise_sigma)}, {"seed", c.noise_seed}};
  Json eps = {{"mode", std::string(to_string(c.epsilon_mode))}};
  if (c.epsilon_mode == EpsilonMode::Fixed) eps["value"] = json_number(c.epsilon_value);
  j["epsilon"] = eps;
  j["extremal"] = {{"column", c.extremal_col()}};
  j["rank_rtol"] = json_number(c.rank_rtol);
  j["outputs"] = {{"dir", c.out_dir}, {"pgm", c.pgm}};
  return j;
}

Scene build_scene(const SenseConfig& c) {
  Scene s;
  s.phantom = make_phantom(c.phantom, c.h, c.w, c.phantom_seed);
  s.coils = make_coils(c.coils, c.h, c.w, c.coil_seed, c.coil_kind, c.tv_cap);
  if (c.phase_fold) s.coils = fold_phase(std::move(s.coils), s.phantom);
  s.pattern = make_sampling_pattern(c.w, c.accel, c.acs);
  return s;
}

const std::vector<std::string>& map_names() {
  static const std::vector<std::string> names = {
      "support",          "status",           "truth_re",         "truth_im",
      "midpoint_re",      "midpoint_im",      "lower_re",         "upper_re",
      "lower_im",         "upper_im",         "half_width_re",    "half_width_im",
      "diff_lower",       "diff_upper",       "spectral_entry_re", "spectral_entry_im",
      "spectral_row",     "kappa_entry_re",   "kappa_entry_im",   "kappa_row",
      "kappa_dominance",  "extremal_upper_re", "extremal_upper_im", "extremal_lower_re",
      "extremal_lower_im"};
  return names;
}

const Matrix& BoundMaps::map(std::string_view name) const {
  for (const auto& [n, m] : maps) {
    if (n == name) return m;
  }
  throw Error(ErrorCode::InvalidInput, "no map named '" + std::string(name) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RowResult {
  RowReport report;
  std::vector<EntryBound> bounds;
  ConditionReport cond;
  std::vector<std::pair<Index, EntryBound>> diffs;  // left voxel index in row -> bound
  Index skipped_pairs = 0;
  ExtremalRow extremal;
  Vector extremal_upper, extremal_lower;  // lifted
  Vector z;
};

double status_code(BoundStatus s) {
  switch (s) {
    case BoundStatus::Finite: return kStatusFinite;
    case BoundStatus::Unbounded: return kStatusUnbounded;
    case BoundStatus::Infeasible: return kStatusInfeasible;
  }
  return kStatusOff;
}

RowResult process_row(const RowSystem& rs, const Vector& b, const Vector& noise,
                      const SenseConfig& c) {
  RowResult out;
  double eps = 0.0;
  switch (c.epsilon_mode) {
    case EpsilonMode::Heuristic:
      try {
        eps = epsilon_heuristic(rs.factors, b);
      } catch (const Error& e) {
        throw Error(e.code(), "row " + std::to_string(rs.row) + ": " + e.detail());
      }
      break;
    case EpsilonMode::Oracle: eps = noise.norm(); break;
    case EpsilonMode::Fixed: eps = c.epsilon_value; break;
  }
  const LinearSystem sys(rs.factors, b, eps);
  out.bounds = entrywise_bounds(sys);
  out.cond = condition_report(rs.factors);
  out.z = sys.min_norm_solution();

  auto& rep = out.report;
  rep.row = rs.row;
  rep.voxels = rs.voxels();
  rep.lifted_rows = rs.factors.rows();
  rep.rank = rs.factors.rank;
  rep.sigma_max = out.cond.sigma_max;
  rep.sigma_min = out.cond.sigma_min_pos;
  rep.kappa = out.cond.kappa_global;
  rep.epsilon = eps;
  rep.residual_norm = sys.residual_norm();
  rep.lambda = sys.lambda();

  const Index n = rs.voxels();
  std::vector<IndexPair> pairs;
  std::vector<Index> lefts;
  for (Index k = 0; k < n; ++k) {
    const Index col = rs.columns[static_cast<std::size_t>(k)];
    if (k + 1 < n && rs.columns[static_cast<std::size_t>(k + 1)] == col + 1) {
      pairs.emplace_back(rs.lifted.coordinate(k, Part::Real), rs.lifted.coordinate(k + 1, Part::Real));
      lefts.push_back(k);
    } else {
      ++out.skipped_pairs;
    }
  }
  const auto diff = adjacent_difference_bounds(sys, pairs);
  for (std::size_t p = 0; p < diff.size(); ++p) out.diffs.emplace_back(lefts[p], diff[p]);

  out.extremal.row = rs.row;
  out.extremal.epsilon = eps;
  out.extremal_upper = out.z;
  out.extremal_lower = out.z;
  out.extremal.residual_norm = sys.feasible() ? sys.residual_of(out.z) : 0.0;
  const auto it = std::find(rs.columns.begin(), rs.columns.end(), c.extremal_col());
  if (it != rs.columns.end()) {
    const Index k = it - rs.columns.begin();
    const Vector wv = lifted_unit(rs.lifted, k, Part::Real);
    if (out.bounds[static_cast<std::size_t>(rs.lifted.coordinate(k, Part::Real))].status ==
        BoundStatus::Finite) {
      const auto up = extremal_solution(sys, wv, ExtremalTarget::upper());
      const auto lo = extremal_solution(sys, wv, ExtremalTarget::lower());
      out.extremal_upper = up.x;
      out.extremal_lower = lo.x;
      out.extremal.upper = ExtremalCheck{up.achieved_value, up.expected_value, up.residual_norm};
      out.extremal.lower = ExtremalCheck{lo.achieved_value, lo.expected_value, lo.residual_norm};
    }
  }
  return out;
}

}  // namespace

BoundMaps run_pipeline(const SenseConfig& c, unsigned threads) {
  const auto t0 = Clock::now();
  if (c.extremal_col() < 0 || c.extremal_col() >= c.w) {
    throw Error(ErrorCode::ConfigError, "extremal column outside the grid");
  }
  const Scene scene = build_scene(c);
  const Acquisition acq =
      simulate_acquisition(scene.phantom, scene.coils, scene.pattern, c.noise_sigma, c.noise_seed);
  const auto hybrid = to_hybrid(acq.kspace);
  const auto noise_hybrid = to_hybrid(acq.noise);
  const double t_scene = seconds_since(t0);

  const auto t1 = Clock::now();
  const auto systems =
      build_row_systems(scene.phantom, scene.coils, scene.pattern, RankTolerance{c.rank_rtol}, threads);
  const double t_systems = seconds_since(t1);

  const auto t2 = Clock::now();
  std::vector<RowResult> results(systems.size());
  parallel_for(systems.size(), threads, [&](std::size_t i) {
    const RowSystem& rs = systems[i];
    results[i] = process_row(rs, lift_vector(row_data(hybrid, rs.row)),
                             lift_vector(row_data(noise_hybrid, rs.row)), c);
  });
  const double t_bounds = seconds_since(t2);

  BoundMaps out;
  out.h = c.h;
  out.w = c.w;
  out.extremal_column = c.extremal_col();
  out.kept_lines = scene.pattern.kept;
  std::map<std::string, Matrix> m;
  for (const auto& name : map_names()) m[name] = Matrix::Zero(c.h, c.w);

  const ComplexMatrix truth = effective_image(scene.phantom, scene.coils);
  for (Index i = 0; i < c.h; ++i) {
    if (!scene.phantom.support.row(i).any()) out.skipped_rows.push_back(i);
    for (Index j = 0; j < c.w; ++j) {
      if (!scene.phantom.support(i, j)) continue;
      m["support"](i, j) = 1.0;
      m["truth_re"](i, j) = truth(i, j).real();
      m["truth_im"](i, j) = truth(i, j).imag();
    }
  }

  for (std::size_t r = 0; r < systems.size(); ++r) {
    const RowSystem& rs = systems[r];
    const RowResult& res = results[r];
    const Index i = rs.row;
    for (Index k = 0; k < rs.voxels(); ++k) {
      const Index j = rs.columns[static_cast<std::size_t>(k)];
      const Index cre = rs.lifted.coordinate(k, Part::Real);
      const Index cim = rs.lifted.coordinate(k, Part::Imag);
      const EntryBound& bre = res.bounds[static_cast<std::size_t>(cre)];
      const EntryBound& bim = res.bounds[static_cast<std::size_t>(cim)];
      for (const EntryBound* b : {&bre, &bim}) {
        switch (b->status) {
          case BoundStatus::Finite: ++out.finite; break;
          case BoundStatus::Unbounded: ++out.unbounded; break;
          case BoundStatus::Infeasible: ++out.infeasible; break;
        }
      }
      m["status"](i, j) = std::max(status_code(bre.status), status_code(bim.status));
      m["midpoint_re"](i, j) = bre.midpoint;
      m["midpoint_im"](i, j) = bim.midpoint;
      if (bre.status == BoundStatus::Finite) {
        m["lower_re"](i, j) = bre.lower;
        m["upper_re"](i, j) = bre.upper;
        m["half_width_re"](i, j) = bre.half_width;
      }
      if (bim.status == BoundStatus::Finite) {
        m["lower_im"](i, j) = bim.lower;
        m["upper_im"](i, j) = bim.upper;
        m["half_width_im"](i, j) = bim.half_width;
      }
      m["spectral_entry_re"](i, j) = res.cond.spectral_entry(cre);
      m["spectral_entry_im"](i, j) = res.cond.spectral_entry(cim);
      m["kappa_entry_re"](i, j) = res.cond.kappa_entry(cre);
      m["kappa_entry_im"](i, j) = res.cond.kappa_entry(cim);
      if (res.cond.kappa_global) {
        m["spectral_row"](i, j) = 1.0 / res.cond.sigma_min_pos;
        m["kappa_row"](i, j) = *res.cond.kappa_global;
        m["kappa_dominance"](i, j) =
            *res.cond.kappa_global - std::max(res.cond.kappa_entry(cre), res.cond.kappa_entry(cim));
      }
      m["extremal_upper_re"](i, j) = res.extremal_upper(cre);
      m["extremal_upper_im"](i, j) = res.extremal_upper(cim);
      m["extremal_lower_re"](i, j) = res.extremal_lower(cre);
      m["extremal_lower_im"](i, j) = res.extremal_lower(cim);
    }
    for (const auto& [k, b] : res.diffs) {
      if (b.status != BoundStatus::Finite) continue;
      const Index j = rs.columns[static_cast<std::size_t>(k)];
      m["diff_lower"](i, j) = b.lower;
      m["diff_upper"](i, j) = b.upper;
    }
    out.skipped_pairs += res.skipped_pairs;
    out.rows.push_back(res.report);
    out.extremal.push_back(res.extremal);
  }

  for (const auto& name : map_names()) out.maps.emplace_back(name, std::move(m[name]));
  out.timings["scene_s"] = json_number(t_scene);
  out.timings["row_systems_s"] = json_number(t_systems);
  out.timings["bounds_s"] = json_number(t_bounds);
  out.timings["total_s"] = json_number(seconds_since(t0));
  return out;
}

std::string render_pgm(const Matrix& m, double lo, double hi) {
  std::string out = "P5\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
  const double span = hi - lo;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double t = span > 0.0 ? (m(i, j) - lo) / span : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
    }
  }
  return out;
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? json_number(*v) : Json(nullptr); }

Json check_json(const std::optional<ExtremalCheck>& e) {
  if (!e) return nullptr;
  return {{"achieved", json_number(e->achieved)},
          {"expected", json_number(e->expected)},
          {"residual_norm", json_number(e->residual_norm)}};
}

}  // namespace

RunManifest write_pipeline_outputs(const BoundMaps& maps, const SenseConfig& c,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  RunManifest man;
  man.command = "sense";
  man.config = to_json(c);
  man.seeds = {{"phantom", c.phantom_seed}, {"coils", c.coil_seed}, {"noise", c.noise_seed}};

  const auto kept = static_cast<Index>(maps.kept_lines.size());
  Json sampling;
  sampling["kept_lines"] = maps.kept_lines;
  sampling["samples_per_coil"] = kept * maps.h;
  sampling["voxels"] = maps.h * maps.w;
  sampling["undersampling"] = json_number(static_cast<double>(maps.w) / static_cast<double>(kept));
  man.details["sampling"] = sampling;

  Json rows = Json::array();
  for (const auto& r : maps.rows) {
    rows.push_back({{"row", r.row},
                    {"voxels", r.voxels},
                    {"lifted_rows", r.lifted_rows},
                    {"rank", r.rank},
                    {"sigma_max", json_number(r.sigma_max)},
                    {"sigma_min", json_number(r.sigma_min)},
                    {"kappa", optional_number(r.kappa)},
                    {"epsilon", json_number(r.epsilon)},
                    {"residual_norm", json_number(r.residual_norm)},
                    {"lambda", optional_number(r.lambda)}});
  }
  man.details["epsilon_mode"] = std::string(to_string(c.epsilon_mode));
  man.details["rows"] = std::move(rows);
  man.details["skipped_rows"] = maps.skipped_rows;
  man.details["skipped_pairs"] = maps.skipped_pairs;
  man.details["status_counts"] = {
      {"finite", maps.finite}, {"unbounded", maps.unbounded}, {"infeasible", maps.infeasible}};

  Json ext = Json::array();
  for (const auto& e : maps.extremal) {
    ext.push_back({{"row", e.row},
                   {"epsilon", json_number(e.epsilon)},
                   {"upper", check_json(e.upper)},
                   {"lower", check_json(e.lower)}});
  }
  man.details["extremal"] = {{"column", maps.extremal_column}, {"rows", std::move(ext)}};

  Json pgm = Json::object();
  for (const auto& [name, m] : maps.maps) {
    const std::string csv = name + ".csv";
    write_matrix_csv(dir / csv, m);
    man.add_output(dir, csv);
    if (c.pgm) {
      const double lo = m.minCoeff(), hi = m.maxCoeff();
      const std::string file = name + ".pgm";
      write_text_file(dir / file, render_pgm(m, lo, hi));
      man.add_output(dir, file);
      pgm[file] = {{"min", json_number(lo)}, {"max", json_number(hi)}};
    }
  }
  if (c.pgm) {
    man.details["pgm_normalization"] = {{"mapping", "linear min-max to 0..255"}, {"ranges", pgm}};
  }
  man.timings = maps.timings;
  man.write(dir / "manifest.json");
  return man;
}

}  // namespace entrywise::sense
