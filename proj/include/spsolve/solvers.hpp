#pragma once

#include "spsolve/linops.hpp"
#include "spsolve/prox.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace spsolve {

// Penalty in the objective ||Kx - y||^2 + 2 lambda * penalty(Ax), or the hard
// constraint ||x||_1 <= radius for L1Ball.
//
// JointMaxL1 groups a length N*m vector into N groups of m channels stored
// channel-major: group i holds entries { u[i + c*N] : c = 0..m-1 }.  The
// penalty is the sum over groups of the largest channel magnitude.
enum class PenaltyKind { SeparableL1, JointMaxL1, GenericProx, L1Ball };

struct Penalty {
  PenaltyKind kind = PenaltyKind::SeparableL1;
  int group_size = 1;   // JointMaxL1
  ProxFn prox;          // GenericProx: prox of H (lambda folded into H)
  double radius = 0.0;  // L1Ball

  static Penalty separable();
  static Penalty joint(int m);
  static Penalty generic(ProxFn prox);
  static Penalty l1_ball(double radius);
};

struct ProblemSpec {
  MapPtr K;        // data map (required; may be a zero map)
  MapPtr A;        // penalty map; null means identity
  MapPtr B;        // constraint map; null means unconstrained
  Vector y;        // data, length K->rows()
  Vector b;        // constraint rhs, length B->rows() when B is set
  double lambda = 0.0;
  Penalty penalty;

  Index dim() const;
  bool constrained() const { return B != nullptr; }
  // Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

// Step sizes actually used by a run.  tau1/tau3 scale the K and B gradient
// terms, tau2 the dual ascent on w; the convergence conditions are
// ||tau1 K^T K / 2 + tau3 B^T B|| < 1 and tau2 ||A A^T|| < 1 with alpha > 1/2.
struct ResolvedSteps {
  double tau1 = 1.0;
  double tau2 = 1.0;
  double tau3 = 1.0;
  double alpha = 1.0;
  double gram_sq_norm = 0.0;     // estimated ||K^T K / 2 + B^T B||
  double penalty_sq_norm = 1.0;  // estimated ||A A^T||
};

struct SolverState {
  Vector x;  // primal iterate
  Vector w;  // dual iterate for the penalty (empty for L1Ball runs)
  Vector v;  // multiplier iterate for Bx = b (empty when unconstrained);
             // the physical multiplier is (tau3/tau1) * v
  int iteration = 0;
};

struct KKTResiduals {
  double stationarity = 0.0;
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;
};

struct SolverConfig {
  std::optional<double> tau1, tau2, tau3;  // auto-scaled when unset
  double alpha = 1.0;                      // must be > 1/2
  int max_iter = 10000;
  double rel_tol = 1e-9;
  int trace_every = 10;
  std::uint64_t seed = 0;  // power-iteration start vectors
  double divergence_guard = 1e12;
  // Skip norm estimation when the caller already knows these.
  std::optional<double> known_gram_sq_norm;
  std::optional<double> known_penalty_sq_norm;
  // Called once per iteration with the new iterate.
  std::function<void(const SolverState&)> observer;
  // Optional external stop; checked after the observer.  A run halted this
  // way is not marked converged.
  std::function<bool(const SolverState&)> stop_when;
};

struct RunReport {
  SolverState final_state;
  std::vector<int> trace_iterations;
  std::vector<double> objective_trace;
  std::vector<double> constraint_norm_trace;
  std::vector<double> kkt_stationarity_trace;
  std::vector<double> rel_change_trace;
  KKTResiduals kkt;
  int iterations_run = 0;
  bool converged = false;
  double final_objective = 0.0;
  ResolvedSteps steps;
};

// Iterate norm exceeded the divergence guard or went non-finite.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& msg, int iteration)
      : std::runtime_error(msg), iteration(iteration) {}
  int iteration;
};

ResolvedSteps resolve_steps(const ProblemSpec& p, const SolverConfig& cfg);

// Full predictor-corrector scheme: explicit five-line iteration handling K, A
// and B together.  Penalty must be SeparableL1, JointMaxL1 or GenericProx.
RunReport solve_constrained_gist(const ProblemSpec& p, const SolverConfig& cfg,
                                 const SolverState* init = nullptr);

// Unconstrained specialization (B absent).
RunReport solve_gist(const ProblemSpec& p, const SolverConfig& cfg,
                     const SolverState* init = nullptr);

// Iterative soft-thresholding (A = identity, B absent).
RunReport solve_ista(const ProblemSpec& p, const SolverConfig& cfg,
                     const SolverState* init = nullptr);

// Constrained iterative soft-thresholding (A = identity, B present).
RunReport solve_cista(const ProblemSpec& p, const SolverConfig& cfg,
                      const SolverState* init = nullptr);

// Accelerated proximal gradient with the standard momentum rule (B absent).
RunReport solve_fista(const ProblemSpec& p, const SolverConfig& cfg,
                      const SolverState* init = nullptr);

// min ||x||_1 subject to Bx = b.  lambda is only the internal thresholding
// scale of the iteration; the limit solves the basis pursuit problem at any
// positive value.
RunReport solve_basis_pursuit(MapPtr B, const Vector& b,
                              const SolverConfig& cfg, double lambda = 1.0,
                              const SolverState* init = nullptr);

// min ||Kx - y||^2 subject to Bx = b and ||x||_1 <= radius.
RunReport solve_l1_constrained(MapPtr K, const Vector& y, MapPtr B,
                               const Vector& b, double radius,
                               const SolverConfig& cfg,
                               const SolverState* init = nullptr);

// ||Kx - y||^2 + 2 lambda penalty(Ax); data term only for L1Ball, and
// 2 H(Ax) for GenericProx (requires the prox to carry a value function).
double objective(const ProblemSpec& p, const Vector& x);

// Residuals of the variational equations at (x, w, v):
//   stationarity     ||K^T(Kx - y) + A^T w - B^T v_phys||
//   dual feasibility ||w - dual_ball_projection(w + Ax)||
//   primal           ||Bx - b||
// For L1Ball runs the stationarity residual is the fixed-point residual of
// the projected iteration and dual feasibility is zero.
KKTResiduals kkt_residuals(const ProblemSpec& p, const ResolvedSteps& steps,
                           const SolverState& s);

// Weighted squared distance from s to ref that the convergence analysis
// shows is non-increasing along iterates when ref is a fixed point:
//   ||dx||^2 - tau3 ||B dx||^2
//   + (tau1^2/tau2) (||dw||^2 - tau2 ||A^T dw||^2)
//   + alpha tau3 ||dv||^2.
// Throws std::domain_error when the value is below -1e-10 (step-size norm
// conditions violated).
double lyapunov_value(const ProblemSpec& p, const ResolvedSteps& steps,
                      const SolverState& ref, const SolverState& s);

}  // namespace spsolve
