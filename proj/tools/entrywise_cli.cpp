#include "entrywise/bounds.hpp"
#include "entrywise/complex_lift.hpp"
#include "entrywise/csv_io.hpp"
#include "entrywise/errors.hpp"
#include "entrywise/json_io.hpp"
#include "entrywise/manifest.hpp"
#include "entrywise/matfree.hpp"
#include "entrywise/pipeline.hpp"
#include "entrywise/sense_operator.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace entrywise;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStatus = 2;

struct Globals {
  unsigned threads = 1;
  bool manifest_only = false;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

int print_manifest_only(const std::string& command, const Json& config) {
  RunManifest m;
  m.command = command;
  m.config = config;
  Json j = m.to_json();
  j.erase("outputs");
  j.erase("timings");
  std::cout << dump_json(j);
  return kExitOk;
}

Index parse_index(std::string_view token) {
  Index v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw Error(ErrorCode::InvalidInput, "bad entry index '" + std::string(token) + "'");
  }
  return v;
}

std::vector<Index> parse_entries(const std::string& spec, Index n) {
  std::vector<Index> out;
  if (spec == "all") {
    for (Index i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  std::string_view rest = spec;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const Index i = parse_index(rest.substr(0, comma));
    if (i >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "entry " + std::to_string(i) + " out of range for " + std::to_string(n) + " unknowns");
    }
    out.push_back(i);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, "--entries is empty");
  return out;
}

struct LoadedSystem {
  Matrix a;
  Vector b;
  std::optional<LiftedSystem> lifted;
};

LoadedSystem load_system(const std::string& matrix, const std::string& data, bool complex) {
  LoadedSystem s;
  if (complex) {
    const ComplexMatrix ac = read_complex_matrix_csv(matrix);
    const ComplexMatrix bc = read_complex_matrix_csv(data);
    if (bc.cols() != 1) throw Error(ErrorCode::InvalidInput, data + ": expected a single column");
    auto [lifted, br] = lift_system(ac, bc.col(0));
    s.a = lifted.a_real;
    s.b = std::move(br);
    s.lifted = std::move(lifted);
  } else {
    s.a = read_matrix_csv(matrix);
    s.b = read_vector_csv(data);
  }
  if (s.a.rows() != s.b.size()) {
    throw Error(ErrorCode::DimensionMismatch, matrix + " has " + std::to_string(s.a.rows()) + " rows but " +
                                                  data + " has " + std::to_string(s.b.size()) + " entries");
  }
  return s;
}

Matrix load_weights(const std::string& path, Index n) {
  Matrix w = read_matrix_csv(path);
  if (w.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, path + " has " + std::to_string(w.rows()) + " rows, expected " +
                                                  std::to_string(n));
  }
  return w;
}

Json condition_json(const ConditionReport& c) {
  Json j;
  j["sigma_max"] = json_number(c.sigma_max);
  j["sigma_min_pos"] = json_number(c.sigma_min_pos);
  j["rank"] = c.rank;
  j["kappa"] = c.kappa_global ? json_number(*c.kappa_global) : Json(nullptr);
  Json ke = Json::array(), se = Json::array();
  for (Index i = 0; i < c.kappa_entry.size(); ++i) {
    ke.push_back(json_number(c.kappa_entry(i)));
    se.push_back(json_number(c.spectral_entry(i)));
  }
  j["kappa_entry"] = std::move(ke);
  j["spectral_entry"] = std::move(se);
  return j;
}

// --- bounds -----------------------------------------------------------------

struct BoundsArgs {
  std::string matrix, data, weights, entries = "all", json_out;
  double epsilon = 0.0;
  double rtol = RankTolerance::kDefault;
  double ortho_tol = kDefaultOrthoTol;
  bool complex = false;
  bool condition = false;

  Json echo() const {
    return {{"matrix", matrix},       {"data", data},         {"epsilon", json_number(epsilon)},
            {"weights", weights},     {"entries", entries},   {"rtol", json_number(rtol)},
            {"ortho_tol", json_number(ortho_tol)}, {"complex", complex}, {"condition", condition}};
  }
};

int cmd_bounds(const BoundsArgs& args, const Globals& g) {
  if (g.manifest_only) return print_manifest_only("bounds", args.echo());
  const LoadedSystem s = load_system(args.matrix, args.data, args.complex);
  const LinearSystem sys(s.a, s.b, args.epsilon, SolveOptions{RankTolerance{args.rtol}, args.ortho_tol});

  Json records = Json::array();
  bool infeasible = false;
  auto add = [&](Json rec, const EntryBound& b) {
    infeasible = infeasible || b.status == BoundStatus::Infeasible;
    records.push_back(std::move(rec));
  };

  if (!args.weights.empty()) {
    const Matrix w = load_weights(args.weights, s.a.cols());
    for (Index k = 0; k < w.cols(); ++k) {
      const EntryBound b = functional_bound(sys, w.col(k));
      add(bound_record(k, b), b);
    }
  } else {
    const Index n_user = s.lifted ? s.lifted->complex_cols : s.a.cols();
    const auto entries = parse_entries(args.entries, n_user);
    const auto all = entrywise_bounds(sys);
    for (Index i : entries) {
      if (!s.lifted) {
        add(bound_record(i, all[static_cast<std::size_t>(i)]), all[static_cast<std::size_t>(i)]);
        continue;
      }
      for (Part part : {Part::Real, Part::Imag}) {
        const Index coord = s.lifted->coordinate(i, part);
        const EntryBound& b = all[static_cast<std::size_t>(coord)];
        Json rec = bound_record(coord, b);
        rec["voxel"] = i;
        rec["part"] = part == Part::Real ? "re" : "im";
        add(std::move(rec), b);
      }
    }
  }

  Json out;
  out["rows"] = s.a.rows();
  out["cols"] = s.a.cols();
  out["rank"] = sys.factors().rank;
  out["rtol"] = json_number(args.rtol);
  out["epsilon"] = json_number(args.epsilon);
  out["residual_norm"] = json_number(sys.residual_norm());
  out["lambda"] = sys.lambda() ? json_number(*sys.lambda()) : Json(nullptr);
  out["records"] = std::move(records);
  if (args.condition) out["condition"] = condition_json(condition_report(sys.factors()));
  emit(dump_json(out), args.json_out);
  if (infeasible) {
    std::cerr << "infeasible: ||P_perp b|| = " << format_double(sys.residual_norm())
              << " exceeds epsilon = " << format_double(args.epsilon) << "\n";
    return kExitStatus;
  }
  return kExitOk;
}

// --- extremal ---------------------------------------------------------------

struct ExtremalArgs {
  std::string matrix, data, weights, target = "upper", out, json_out;
  std::optional<Index> weight_index;
  double epsilon = 0.0;
  double rtol = RankTolerance::kDefault;
  double ortho_tol = kDefaultOrthoTol;

  Json echo() const {
    return {{"matrix", matrix},
            {"data", data},
            {"epsilon", json_number(epsilon)},
            {"target", target},
            {"weight_index", weight_index ? Json(*weight_index) : Json(nullptr)},
            {"weights", weights},
            {"rtol", json_number(rtol)},
            {"ortho_tol", json_number(ortho_tol)},
            {"out", out}};
  }
};

ExtremalTarget parse_target(const std::string& t) {
  if (t == "lower") return ExtremalTarget::lower();
  if (t == "upper") return ExtremalTarget::upper();
  if (t.rfind("value:", 0) == 0) return ExtremalTarget::value(parse_double(t.substr(6), "--target", 0));
  throw Error(ErrorCode::InvalidInput, "--target must be lower, upper or value:<alpha>");
}

int cmd_extremal(const ExtremalArgs& args, const Globals& g) {
  if (g.manifest_only) return print_manifest_only("extremal", args.echo());
  const ExtremalTarget target = parse_target(args.target);
  const LoadedSystem s = load_system(args.matrix, args.data, false);
  Vector w;
  if (args.weight_index) {
    if (*args.weight_index >= s.a.cols()) {
      throw Error(ErrorCode::IndexOutOfRange, "--weight-index out of range");
    }
    w = unit_vector(s.a.cols(), *args.weight_index);
  } else if (!args.weights.empty()) {
    const Matrix wm = load_weights(args.weights, s.a.cols());
    if (wm.cols() != 1) throw Error(ErrorCode::InvalidInput, args.weights + ": expected a single column");
    w = wm.col(0);
  } else {
    throw Error(ErrorCode::InvalidInput, "one of --weight-index or --weights is required");
  }
  const LinearSystem sys(s.a, s.b, args.epsilon, SolveOptions{RankTolerance{args.rtol}, args.ortho_tol});
  const ExtremalSolution sol = extremal_solution(sys, w, target);
  write_matrix_csv(args.out, sol.x);
  Json v;
  v["residual_norm"] = json_number(sol.residual_norm);
  v["epsilon"] = json_number(args.epsilon);
  v["achieved"] = json_number(sol.achieved_value);
  v["expected"] = json_number(sol.expected_value);
  v["solution"] = args.out;
  emit(dump_json(v), args.json_out);
  return kExitOk;
}

// --- estimate-diag ----------------------------------------------------------

struct DiagArgs {
  std::string matrix, op, out_dir;
  int samples = 100;
  std::string probe = "gaussian";
  std::uint64_t seed = 0;
  double tau = 0.0;
  int max_iters = 20000;
  double rel_tol = 1e-12;
  int power_iters = 200;

  Json echo() const {
    return {{"matrix", matrix},  {"op", op},         {"samples", samples},
            {"probe", probe},    {"seed", seed},     {"tau", json_number(tau)},
            {"max_iters", max_iters}, {"rel_tol", json_number(rel_tol)},
            {"power_iters", power_iters}, {"out_dir", out_dir}};
  }
};

int cmd_estimate_diag(const DiagArgs& args, const Globals& g) {
  if (g.manifest_only) return print_manifest_only("estimate-diag", args.echo());
  if (args.matrix.empty() == args.op.empty()) {
    throw Error(ErrorCode::InvalidInput, "exactly one of --matrix or --op is required");
  }
  if (args.samples < 1) throw Error(ErrorCode::InvalidInput, "--samples must be at least 1");
  const ProbeKind kind = parse_probe_kind(args.probe);
  const auto t0 = std::chrono::steady_clock::now();

  std::unique_ptr<LinearOperator> op;
  std::optional<Matrix> dense;
  std::optional<sense::SenseConfig> scfg;
  std::unique_ptr<sense::SenseOperator> sop;
  if (!args.matrix.empty()) {
    dense = read_matrix_csv(args.matrix);
    op = std::make_unique<DenseOperator>(*dense);
  } else {
    if (args.op.rfind("sense:", 0) != 0) {
      throw Error(ErrorCode::InvalidInput, "--op must have the form sense:<config.json>");
    }
    scfg = sense::parse_sense_config(read_json_file(args.op.substr(6)));
    const sense::Scene scene = sense::build_scene(*scfg);
    sop = std::make_unique<sense::SenseOperator>(scene.phantom, scene.coils, scene.pattern);
  }
  const LinearOperator& A = sop ? static_cast<const LinearOperator&>(*sop) : *op;

  LandweberConfig cfg;
  cfg.tau = args.tau;
  cfg.max_iters = args.max_iters;
  cfg.rel_tol = args.rel_tol;
  cfg.sigma1_estimate = power_iteration_sigma1(A, args.power_iters, args.seed);
  const DiagEstimate est = stochastic_diag(A, args.samples, kind, args.seed, cfg, g.threads);

  Json out = to_json(est);
  out["sigma1_estimate"] = json_number(cfg.sigma1_estimate);
  out["tau"] = json_number(cfg.step());
  if (dense) {
    const SvdFactors f = svd_truncated(*dense);
    Json exact = Json::array(), rel = Json::array();
    for (Index i = 0; i < dense->cols(); ++i) {
      const double e = std::pow(pinv_transpose_norm_entry(f, i), 2);
      exact.push_back(json_number(e));
      rel.push_back(e > 0.0 ? json_number(std::abs(est.values(i) - e) / e) : Json(nullptr));
    }
    out["exact"] = std::move(exact);
    out["relative_error"] = std::move(rel);
  }
  if (!est.flagged.empty()) {
    std::cerr << "warning: " << est.flagged.size() << " of " << est.samples
              << " samples did not converge and were excluded\n";
  }

  if (args.out_dir.empty()) {
    std::cout << dump_json(out);
    return kExitOk;
  }
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  RunManifest man;
  man.command = "estimate-diag";
  man.config = args.echo();
  man.seeds = {{"probe", args.seed}};
  write_text_file(dir / "diag.json", dump_json(out));
  man.add_output(dir, "diag.json");
  if (dense) {
    write_matrix_csv(dir / "diag.csv", est.values);
    man.add_output(dir, "diag.csv");
  } else {
    Matrix re = Matrix::Zero(scfg->h, scfg->w), im = re;
    for (Index v = 0; v < sop->voxels(); ++v) {
      const auto [i, j] = sop->voxel_position(v);
      re(i, j) = est.values(v);
      im(i, j) = est.values(sop->voxels() + v);
    }
    write_matrix_csv(dir / "diag_re.csv", re);
    write_matrix_csv(dir / "diag_im.csv", im);
    man.add_output(dir, "diag_re.csv");
    man.add_output(dir, "diag_im.csv");
    man.details["sense_config"] = sense::to_json(*scfg);
  }
  man.timings["total_s"] =
      json_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  man.write(dir / "manifest.json");
  return kExitOk;
}

// --- sense ------------------------------------------------------------------

struct SenseArgs {
  std::string config, out;
  std::optional<double> epsilon;
  bool pgm = false;
};

int cmd_sense(const SenseArgs& args, const Globals& g) {
  sense::SenseConfig cfg =
      args.config.empty() ? sense::SenseConfig{} : sense::parse_sense_config(read_json_file(args.config));
  if (!args.out.empty()) cfg.out_dir = args.out;
  if (args.epsilon) {
    if (!(*args.epsilon >= 0.0)) throw Error(ErrorCode::InvalidInput, "--epsilon must be non-negative");
    cfg.epsilon_mode = sense::EpsilonMode::Fixed;
    cfg.epsilon_value = *args.epsilon;
  }
  if (args.pgm) cfg.pgm = true;
  if (g.manifest_only) return print_manifest_only("sense", sense::to_json(cfg));
  if (cfg.out_dir.empty()) throw Error(ErrorCode::ConfigError, "an output directory is required (--out or outputs.dir)");

  const sense::BoundMaps maps = sense::run_pipeline(cfg, g.threads);
  const RunManifest man = sense::write_pipeline_outputs(maps, cfg, cfg.out_dir);
  std::cout << "wrote " << man.outputs.size() << " files and manifest.json to " << cfg.out_dir
            << " (finite " << maps.finite << ", unbounded " << maps.unbounded << ", infeasible "
            << maps.infeasible << ")\n";
  return maps.infeasible > 0 ? kExitStatus : kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::StatusMismatch:
    case ErrorCode::NonConvergence:
      return kExitStatus;
    default:
      return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entrywise bounds for nearly data-consistent solutions"};
  app.set_version_flag("--version", entrywise::version());
  app.require_subcommand(1);

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
  app.add_flag("--manifest-only", g.manifest_only, "Print the resolved configuration and exit");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Entrywise or functional bounds over {x : ||Ax - b|| <= eps}");
  bounds->add_option("--matrix", ba.matrix, "Matrix CSV")->required();
  bounds->add_option("--data", ba.data, "Data vector CSV")->required();
  bounds->add_option("--epsilon", ba.epsilon, "Data-consistency tolerance")->required()->check(CLI::NonNegativeNumber);
  auto* wopt = bounds->add_option("--weights", ba.weights, "CSV whose columns are functionals w");
  bounds->add_option("--entries", ba.entries, "all, or comma-separated 0-based indices")
      ->capture_default_str()
      ->excludes(wopt);
  bounds->add_option("--rtol", ba.rtol, "Relative singular value cutoff")->capture_default_str();
  bounds->add_option("--ortho-tol", ba.ortho_tol, "Nullspace orthogonality tolerance")->capture_default_str();
  bounds->add_option("--json", ba.json_out, "Write JSON here instead of stdout");
  bounds->add_flag("--complex", ba.complex, "Matrix and data hold complex re+imj entries");
  bounds->add_flag("--condition", ba.condition, "Include the condition report");

  ExtremalArgs ea;
  auto* extremal = app.add_subcommand("extremal", "Feasible solution attaining a bound");
  extremal->add_option("--matrix", ea.matrix, "Matrix CSV")->required();
  extremal->add_option("--data", ea.data, "Data vector CSV")->required();
  extremal->add_option("--epsilon", ea.epsilon, "Data-consistency tolerance")->required()->check(CLI::NonNegativeNumber);
  extremal->add_option("--target", ea.target, "lower, upper or value:<alpha>")->capture_default_str();
  auto* wi = extremal->add_option("--weight-index", ea.weight_index, "0-based entry index");
  extremal->add_option("--weights", ea.weights, "Single-column CSV functional")->excludes(wi);
  extremal->add_option("--out", ea.out, "CSV file for the solution")->required();
  extremal->add_option("--json", ea.json_out, "Write the verification block here instead of stdout");
  extremal->add_option("--rtol", ea.rtol, "Relative singular value cutoff")->capture_default_str();
  extremal->add_option("--ortho-tol", ea.ortho_tol, "Nullspace orthogonality tolerance")->capture_default_str();

  DiagArgs da;
  auto* diag = app.add_subcommand("estimate-diag", "Stochastic estimate of ||(A^+)^T e_i||^2");
  auto* mopt = diag->add_option("--matrix", da.matrix, "Matrix CSV");
  diag->add_option("--op", da.op, "Matrix-free operator, sense:<config.json>")->excludes(mopt);
  diag->add_option("--samples", da.samples, "Number of probes")->capture_default_str();
  diag->add_option("--probe", da.probe, "gaussian or rademacher")->capture_default_str();
  diag->add_option("--seed", da.seed, "RNG seed")->capture_default_str();
  diag->add_option("--tau", da.tau, "Landweber step (0 = 1/sigma1^2)")->capture_default_str();
  diag->add_option("--max-iters", da.max_iters, "Landweber iteration cap")->capture_default_str();
  diag->add_option("--rel-tol", da.rel_tol, "Landweber relative update tolerance")->capture_default_str();
  diag->add_option("--power-iters", da.power_iters, "Power iterations for sigma1")->capture_default_str();
  diag->add_option("--out-dir", da.out_dir, "Write diag.json, CSV maps and manifest.json here");

  SenseArgs sa;
  auto* sense_cmd = app.add_subcommand("sense", "Simulated SENSE acquisition and bound maps");
  sense_cmd->add_option("--config", sa.config, "JSON configuration (defaults when omitted)");
  sense_cmd->add_option("--out", sa.out, "Output directory (overrides outputs.dir)");
  sense_cmd->add_option("--epsilon", sa.epsilon, "Use this epsilon for every row");
  sense_cmd->add_flag("--pgm", sa.pgm, "Also write PGM renders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*bounds) return cmd_bounds(ba, g);
    if (*extremal) return cmd_extremal(ea, g);
    if (*diag) return cmd_estimate_diag(da, g);
    if (*sense_cmd) return cmd_sense(sa, g);
  } catch (const entrywise::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
