// Command-line front end: generic solves from dense text files, the MEG
// reconstruction pipeline, prox utilities, and step-size norm checks.

#include "spsolve/io.hpp"
#include "spsolve/json_out.hpp"
#include "spsolve/meg/experiment.hpp"
#include "spsolve/prox.hpp"
#include "spsolve/report_io.hpp"
#include "spsolve/solvers.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace spsolve;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitIterationCap = 2;
constexpr int kExitDiverged = 3;

struct CommonFlags {
  double lambda = 0.0;
  double alpha = 1.0;
  double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;  // 0 = auto
  int max_iter = 10000;
  double rel_tol = 1e-9;
  int trace_every = 10;
  std::uint64_t seed = 0;
  std::string penalty = "l1";
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_penalty = true) {
  cmd->add_option("--lambda", f.lambda, "Penalty weight");
  cmd->add_option("--alpha", f.alpha, "Multiplier step divisor (> 1/2)");
  cmd->add_option("--tau1", f.tau1, "Step size for the data term (0 = auto)");
  cmd->add_option("--tau2", f.tau2, "Dual step size (0 = auto)");
  cmd->add_option("--tau3", f.tau3, "Constraint step size (0 = auto)");
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap");
  cmd->add_option("--rel-tol", f.rel_tol, "Relative-change stopping tolerance");
  cmd->add_option("--trace-every", f.trace_every, "Trace sampling stride");
  cmd->add_option("--seed", f.seed, "Seed for norm-estimation start vectors");
  if (with_penalty) {
    cmd->add_option("--penalty", f.penalty, "Penalty: l1 or joint:<m>");
  }
  cmd->add_option("--out", f.out, "Output directory for report.json/trace.csv");
}

SolverConfig to_config(const CommonFlags& f) {
  SolverConfig c;
  if (f.tau1 > 0) c.tau1 = f.tau1;
  if (f.tau2 > 0) c.tau2 = f.tau2;
  if (f.tau3 > 0) c.tau3 = f.tau3;
  c.alpha = f.alpha;
  c.max_iter = f.max_iter;
  c.rel_tol = f.rel_tol;
  c.trace_every = f.trace_every;
  c.seed = f.seed;
  return c;
}

Penalty parse_penalty(const std::string& s) {
  if (s == "l1") return Penalty::separable();
  if (s.rfind("joint:", 0) == 0) {
    const int m = std::stoi(s.substr(6));
    return Penalty::joint(m);
  }
  throw std::invalid_argument("unknown penalty '" + s + "' (use l1 or joint:<m>)");
}

void emit_report(const CommonFlags& f, const std::string& solver,
                 const RunReport& rep) {
  JsonValue j = run_report_json(rep, true);
  JsonValue out = JsonValue::object();
  out.set("solver", solver);
  out.set("lambda", f.lambda);
  out.set("report", std::move(j));
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    std::ofstream rf(f.out + "/report.json");
    rf << out.dump(2);
    std::ofstream tf(f.out + "/trace.csv");
    write_trace_csv(tf, rep);
  }
  std::cout << out.dump(2);
}

int finish(const CommonFlags& f, const std::string& solver, const RunReport& rep) {
  emit_report(f, solver, rep);
  return rep.converged ? kExitOk : kExitIterationCap;
}

int run_solve(const std::string& k_path, const std::string& a_path,
              const std::string& b_path, const std::string& y_path,
              const std::string& rhs_path, const CommonFlags& flags) {
  ProblemSpec p;
  p.K = dense(read_dense_matrix(k_path));
  p.y = read_dense_vector(y_path);
  if (!a_path.empty()) p.A = dense(read_dense_matrix(a_path));
  if (!b_path.empty()) {
    if (rhs_path.empty()) {
      throw std::invalid_argument(
          "constraint map --B given without right-hand side --b");
    }
    p.B = dense(read_dense_matrix(b_path));
    p.b = read_dense_vector(rhs_path);
  } else if (!rhs_path.empty()) {
    throw std::invalid_argument("right-hand side --b given without --B");
  }
  p.lambda = flags.lambda;
  p.penalty = parse_penalty(flags.penalty);
  const SolverConfig cfg = to_config(flags);

  if (p.B && p.A) return finish(flags, "constrained-gist", solve_constrained_gist(p, cfg));
  if (p.B) return finish(flags, "cista", solve_cista(p, cfg));
  if (p.A) return finish(flags, "gist", solve_gist(p, cfg));
  return finish(flags, "ista", solve_ista(p, cfg));
}

int run_bp(const std::string& b_path, const std::string& rhs_path,
           double radius, CommonFlags& flags) {
  MapPtr b_map = dense(read_dense_matrix(b_path));
  const Vector rhs = read_dense_vector(rhs_path);
  const SolverConfig cfg = to_config(flags);
  if (radius > 0) {
    // Feasibility inside the l1 ball instead of norm minimization.
    MapPtr k = zero(0, b_map->cols());
    return finish(flags, "l1-constrained",
                  solve_l1_constrained(k, Vector(0), b_map, rhs, radius, cfg));
  }
  if (flags.lambda <= 0) flags.lambda = 1.0;  // internal thresholding scale
  return finish(flags, "basis-pursuit",
                solve_basis_pursuit(b_map, rhs, cfg, flags.lambda));
}

int run_l1c(const std::string& k_path, const std::string& y_path,
            const std::string& b_path, const std::string& rhs_path,
            double radius, const CommonFlags& flags) {
  MapPtr k = dense(read_dense_matrix(k_path));
  const Vector y = read_dense_vector(y_path);
  MapPtr b_map;
  Vector rhs;
  if (!b_path.empty()) {
    if (rhs_path.empty()) {
      throw std::invalid_argument(
          "constraint map --B given without right-hand side --b");
    }
    b_map = dense(read_dense_matrix(b_path));
    rhs = read_dense_vector(rhs_path);
  }
  return finish(flags, "l1-constrained",
                solve_l1_constrained(k, y, b_map, rhs, radius, to_config(flags)));
}

int run_prox(const std::string& in_path, const std::string& mode, double level,
             int joint_m, const std::string& out_path) {
  Matrix input = read_dense_matrix(in_path);
  Matrix result;
  if (mode == "soft") {
    result = Matrix(soft_threshold(input.col(0), level));
  } else if (mode == "clamp") {
    result = Matrix(project_linf(input.col(0), level));
  } else if (mode == "project-l1") {
    result = Matrix(project_l1_ball(input.col(0), level));
  } else if (mode == "joint") {
    if (input.cols() != joint_m) {
      throw std::invalid_argument(
          "joint prox expects a matrix with m columns (one group per row)");
    }
    result = grouped_joint_threshold(input, level);
  } else {
    throw std::invalid_argument("unknown prox mode '" + mode + "'");
  }
  write_dense_matrix(std::cout, result);
  if (!out_path.empty()) write_dense_matrix(out_path, result);
  return kExitOk;
}

int run_normcheck(const std::string& k_path, const std::string& a_path,
                  const std::string& b_path, double tau1, double tau2,
                  double tau3, std::uint64_t seed) {
  MapPtr k = dense(read_dense_matrix(k_path));
  MapPtr b_map = b_path.empty() ? nullptr : dense(read_dense_matrix(b_path));
  MapPtr a_map = a_path.empty() ? nullptr : dense(read_dense_matrix(a_path));

  const double combined =
      gram_combination_sq_norm(*k, b_map.get(), 0.5, 1.0, 1e-10, 20000, seed).value;
  const double scaled =
      gram_combination_sq_norm(*k, b_map.get(), tau1 / 2.0, tau3, 1e-10, 20000, seed)
          .value;
  const double a_norm =
      a_map ? estimate_sq_norm(*a_map, 1e-10, 20000, seed).value : 1.0;
  // Identity A with tau2 = 1 is the classical thresholding boundary case;
  // only an explicit penalty map is held to the strict inequality.
  const bool dual_ok = a_map ? tau2 * a_norm < 1.0 : tau2 <= 1.0;

  JsonValue j = JsonValue::object();
  j.set("gram_sq_norm", combined);
  j.set("penalty_sq_norm", a_norm);
  j.set("tau1", tau1);
  j.set("tau2", tau2);
  j.set("tau3", tau3);
  j.set("scaled_gram_sq_norm", scaled);
  j.set("scaled_penalty_sq_norm", tau2 * a_norm);
  const bool gram_ok = scaled < 1.0;
  j.set("gram_condition_ok", gram_ok);
  j.set("dual_condition_ok", dual_ok);
  const double safe = 0.9 / std::max(combined, 1e-300);
  j.set("suggested_tau1", safe);
  j.set("suggested_tau3", safe);
  j.set("suggested_tau2", 0.9 / std::max(a_norm, 1e-300));
  std::cout << j.dump(2);
  if (!gram_ok) {
    std::cout << "step-size condition violated: ||tau1 K'K/2 + tau3 B'B|| = "
              << scaled << " >= 1; try tau1 = tau3 = " << safe << "\n";
  }
  if (!dual_ok) {
    std::cout << "dual step condition violated: tau2 ||AA'|| = "
              << tau2 * a_norm << " >= 1\n";
  }
  return (gram_ok && dual_ok) ? kExitOk : kExitInputError;
}

int run_meg(const std::string& config_path, const std::string& out_dir) {
  const auto config = meg::ExperimentConfig::from_json_file(config_path);
  meg::run_experiment(config, out_dir, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery under linear equality constraints"};
  app.require_subcommand(1);

  // solve
  CommonFlags solve_flags;
  std::string k_path, a_path, b_path, y_path, rhs_path;
  auto* solve_cmd = app.add_subcommand(
      "solve", "Penalized least squares with optional penalty map and constraint");
  solve_cmd->add_option("--K", k_path, "Data map (dense text)")->required();
  solve_cmd->add_option("--y", y_path, "Data vector")->required();
  solve_cmd->add_option("--A", a_path, "Penalty map (default: identity)");
  solve_cmd->add_option("--B", b_path, "Constraint map");
  solve_cmd->add_option("--b", rhs_path, "Constraint right-hand side");
  add_common(solve_cmd, solve_flags);

  // bp
  CommonFlags bp_flags;
  std::string bp_b, bp_rhs;
  double bp_radius = 0.0;
  auto* bp_cmd = app.add_subcommand("bp", "l1 basis pursuit: min ||x||_1 s.t. Bx = b");
  bp_cmd->add_option("--B", bp_b, "Constraint map")->required();
  bp_cmd->add_option("--b", bp_rhs, "Right-hand side")->required();
  bp_cmd->add_option("--radius", bp_radius,
                     "Solve the l1-ball feasibility variant instead");
  add_common(bp_cmd, bp_flags, false);

  // l1c
  CommonFlags l1c_flags;
  std::string l1c_k, l1c_y, l1c_b, l1c_rhs;
  double l1c_radius = 0.0;
  auto* l1c_cmd = app.add_subcommand(
      "l1c", "Least squares under Bx = b and ||x||_1 <= radius");
  l1c_cmd->add_option("--K", l1c_k, "Data map")->required();
  l1c_cmd->add_option("--y", l1c_y, "Data vector")->required();
  l1c_cmd->add_option("--B", l1c_b, "Constraint map");
  l1c_cmd->add_option("--b", l1c_rhs, "Constraint right-hand side");
  l1c_cmd->add_option("--radius", l1c_radius, "l1 ball radius")->required();
  add_common(l1c_cmd, l1c_flags, false);

  // prox
  std::string prox_in, prox_mode = "soft", prox_out;
  double prox_level = 0.0;
  int prox_m = 2;
  auto* prox_cmd = app.add_subcommand("prox", "Apply a proximity operator to a file");
  prox_cmd->add_option("--in", prox_in, "Input vector/matrix")->required();
  prox_cmd->add_option("--mode", prox_mode, "soft | clamp | project-l1 | joint");
  prox_cmd->add_option("--lambda", prox_level, "Threshold / radius")->required();
  prox_cmd->add_option("--m", prox_m, "Channels per group (joint mode)");
  prox_cmd->add_option("--out", prox_out, "Also write the result here");

  // normcheck
  std::string nc_k, nc_a, nc_b;
  double nc_tau1 = 1.0, nc_tau2 = 1.0, nc_tau3 = 1.0;
  std::uint64_t nc_seed = 0;
  auto* nc_cmd = app.add_subcommand(
      "normcheck", "Estimate operator norms and verify the step-size conditions");
  nc_cmd->add_option("--K", nc_k, "Data map")->required();
  nc_cmd->add_option("--A", nc_a, "Penalty map");
  nc_cmd->add_option("--B", nc_b, "Constraint map");
  nc_cmd->add_option("--tau1", nc_tau1, "Step size to check");
  nc_cmd->add_option("--tau2", nc_tau2, "Dual step size to check");
  nc_cmd->add_option("--tau3", nc_tau3, "Constraint step size to check");
  nc_cmd->add_option("--seed", nc_seed, "Power iteration seed");

  // meg
  std::string meg_config, meg_out = "meg_out";
  auto* meg_cmd = app.add_subcommand("meg", "Run the synthetic MEG reconstruction cases");
  meg_cmd->add_option("--config", meg_config, "Experiment configuration (JSON)")
      ->required();
  meg_cmd->add_option("--out", meg_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve_cmd->parsed()) {
      return run_solve(k_path, a_path, b_path, y_path, rhs_path, solve_flags);
    }
    if (bp_cmd->parsed()) return run_bp(bp_b, bp_rhs, bp_radius, bp_flags);
    if (l1c_cmd->parsed()) {
      return run_l1c(l1c_k, l1c_y, l1c_b, l1c_rhs, l1c_radius, l1c_flags);
    }
    if (prox_cmd->parsed()) {
      return run_prox(prox_in, prox_mode, prox_level, prox_m, prox_out);
    }
    if (nc_cmd->parsed()) {
      return run_normcheck(nc_k, nc_a, nc_b, nc_tau1, nc_tau2, nc_tau3, nc_seed);
    }
    if (meg_cmd->parsed()) return run_meg(meg_config, meg_out);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
