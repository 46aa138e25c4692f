#pragma once

#include "spsolve/meg/biot_savart.hpp"
#include "spsolve/meg/cubed_sphere.hpp"
#include "spsolve/meg/wavelet.hpp"
#include "spsolve/solvers.hpp"

#include <functional>
#include <optional>
#include <string>

namespace spsolve::meg {

struct NoiseResult {
  Vector y_noisy;
  double eps_norm = 0.0;
};

// Seeded Gaussian perturbation rescaled so ||eps|| = level * ||y|| exactly.
NoiseResult add_noise(const Vector& y, double level, std::uint64_t seed);

// One discrepancy-principle evaluation: solve at the given lambda (optionally
// warm-started) and report the data residual alongside the run.
using LambdaSolve =
    std::function<std::pair<RunReport, double>(double lambda,
                                               const SolverState* warm)>;

struct TunedSolve {
  double lambda = 0.0;
  double residual = 0.0;
  RunReport report;
  int solves = 0;
};

// Bisection in log-lambda on the converged residual until
// |residual - target| <= tol_rel * target.  lambda_hi_hint should make the
// solution vanish (residual above target); it is grown if it does not.
TunedSolve tune_lambda(const LambdaSolve& solve_at, double target,
                       double tol_rel, double lambda_hi_hint);

struct CaseBudgets {
  int fista = 2000;        // unconstrained cases (a, c)
  int constrained = 20000; // constrained cases (b, d)
};

struct MEGReport {
  char case_label = 'a';
  double e_rec = 0.0;
  double div_norm = 0.0;
  long nnz = 0;
  double residual = 0.0;
  double lambda_used = 0.0;
  int iterations = 0;
  double eps_norm = 0.0;
  int tuning_solves = 0;
};

// Everything the four cases share for one geometry/model draw.
struct ExperimentSetup {
  CubedSphereGrid grid;
  SensorArray sensors;
  WaveletTransform wavelet;
  MapPtr synthesis;   // W^-1 on both channels
  MapPtr biot;        // fields -> sensor readings
  MapPtr divergence;  // fields -> per-voxel divergence
  MapPtr k_total;     // biot o synthesis (unknowns are coefficients)
  MapPtr b_total;     // divergence o synthesis
  Vector j_in;        // synthetic input current density
  Vector y_clean;     // biot(j_in)
  // Inflated norm estimates reused across lambda evaluations.  K (Tesla) and
  // B (divergence) act on wildly different scales, so the step sizes are
  // split: tau1 = 0.45 / k_half_sq_norm and tau3 = 0.45 / b_sq_norm keep
  // ||tau1 K^T K/2 + tau3 B^T B|| below 0.9 by the triangle inequality.
  double k_half_sq_norm = 0.0;  // ||K^T K / 2||
  double b_sq_norm = 0.0;       // ||B^T B||

  ExperimentSetup(int n_face, int sensor_count, int levels,
                  std::uint64_t sensor_seed, std::uint64_t model_seed);
};

struct CaseResult {
  MEGReport report;
  RunReport run;
  Vector coeffs;  // reconstructed wavelet coefficients
  Vector field;   // reconstructed current density
};

// One of the four reconstruction variants: separable (a, b) or joint (c, d)
// penalty, without (a, c) or with (b, d) the divergence constraint.
CaseResult run_case(char case_label, const ExperimentSetup& setup,
                    const Vector& y_noisy, double eps_norm,
                    const CaseBudgets& budgets, double lambda_tol = 0.02,
                    std::optional<double> fixed_lambda = std::nullopt);

struct ExperimentConfig {
  int n_face = 16;
  int sensors = 500;
  double noise_level = 0.1;
  std::vector<std::uint64_t> seeds = {1};
  std::string cases = "abcd";
  CaseBudgets budgets;
  double lambda_tol = 0.02;

  static ExperimentConfig from_json_file(const std::string& path);
};

// Full pipeline: builds the setup, runs the requested cases for every seed,
// writes per-case reports/traces/snapshots under out_dir, returns reports
// in execution order.
std::vector<MEGReport> run_experiment(const ExperimentConfig& config,
                                      const std::string& out_dir,
                                      std::ostream& log);

}  // namespace spsolve::meg
