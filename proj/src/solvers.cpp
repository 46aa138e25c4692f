#include "spsolve/solvers.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace spsolve {

namespace {

constexpr double kTinyNorm = 1e-30;

void project_l1_groups_inplace(Vector& u, Index m, double lambda) {
  const Index n_groups = u.size() / m;
  Vector g(m);
  for (Index i = 0; i < n_groups; ++i) {
    for (Index c = 0; c < m; ++c) g[c] = u[i + c * n_groups];
    const Vector pg = project_l1_ball(g, lambda);
    for (Index c = 0; c < m; ++c) u[i + c * n_groups] = pg[c];
  }
}

void joint_threshold_groups_inplace(Vector& u, Index m, double mu) {
  const Index n_groups = u.size() / m;
  Vector g(m);
  for (Index i = 0; i < n_groups; ++i) {
    for (Index c = 0; c < m; ++c) g[c] = u[i + c * n_groups];
    const Vector tg = joint_threshold(g, mu);
    for (Index c = 0; c < m; ++c) u[i + c * n_groups] = tg[c];
  }
}

double group_max_sum(const Vector& u, Index m) {
  const Index n_groups = u.size() / m;
  double total = 0.0;
  for (Index i = 0; i < n_groups; ++i) {
    double gm = 0.0;
    for (Index c = 0; c < m; ++c) gm = std::max(gm, std::abs(u[i + c * n_groups]));
    total += gm;
  }
  return total;
}

MapPtr effective_a(const ProblemSpec& p) {
  return p.A ? p.A : identity(p.dim());
}

// Objective used for traces; never throws (data term only when the penalty
// value is unavailable).
double trace_objective(const ProblemSpec& p, const Vector& x) {
  Vector kx = p.K->apply(x);
  const double data = (kx - p.y).squaredNorm();
  switch (p.penalty.kind) {
    case PenaltyKind::SeparableL1: {
      const Vector ax = p.A ? p.A->apply(x) : x;
      return data + 2.0 * p.lambda * ax.lpNorm<1>();
    }
    case PenaltyKind::JointMaxL1: {
      const Vector ax = p.A ? p.A->apply(x) : x;
      return data + 2.0 * p.lambda * group_max_sum(ax, p.penalty.group_size);
    }
    case PenaltyKind::GenericProx: {
      if (p.penalty.prox.value) {
        const Vector ax = p.A ? p.A->apply(x) : x;
        return data + 2.0 * p.penalty.prox.value(ax);
      }
      return data;
    }
    case PenaltyKind::L1Ball:
      return data;
  }
  return data;
}

double rel_part(const Vector& nw, const Vector& old) {
  if (nw.size() == 0) return 0.0;
  return (nw - old).norm() / std::max(nw.norm(), 1.0);
}

// Shared per-iteration bookkeeping: relative change, divergence guard,
// trace sampling, observer, stopping.
class LoopRunner {
public:
  LoopRunner(const ProblemSpec& p, const SolverConfig& cfg,
             const ResolvedSteps& steps)
      : p_(p), cfg_(cfg), steps_(steps) {
    report_.steps = steps;
  }

  // Moves the new iterate into st; returns true when the loop should stop.
  bool advance(SolverState& st, Vector& x_new, Vector& w_new, Vector& v_new,
               int it) {
    const double rel = std::max({rel_part(x_new, st.x), rel_part(w_new, st.w),
                                 rel_part(v_new, st.v)});
    st.x.swap(x_new);
    st.w.swap(w_new);
    st.v.swap(v_new);
    st.iteration = it;
    report_.iterations_run = it;

    const double nx = st.x.norm();
    if (!std::isfinite(nx) || nx > cfg_.divergence_guard ||
        !std::isfinite(rel)) {
      std::ostringstream os;
      os << "solver diverged at iteration " << it << " (|x| = " << nx << ")";
      throw DivergenceError(os.str(), it);
    }

    if ((it - 1) % std::max(cfg_.trace_every, 1) == 0) {
      report_.trace_iterations.push_back(it);
      report_.objective_trace.push_back(trace_objective(p_, st.x));
      report_.constraint_norm_trace.push_back(
          p_.B ? (p_.B->apply(st.x) - p_.b).norm() : 0.0);
      report_.kkt_stationarity_trace.push_back(
          kkt_residuals(p_, steps_, st).stationarity);
      report_.rel_change_trace.push_back(rel);
    }
    if (cfg_.observer) cfg_.observer(st);
    if (cfg_.stop_when && cfg_.stop_when(st)) return true;

    if (rel < cfg_.rel_tol) {
      report_.converged = true;
      return true;
    }
    return false;
  }

  RunReport finish(SolverState st) {
    report_.kkt = kkt_residuals(p_, steps_, st);
    report_.final_objective = trace_objective(p_, st.x);
    report_.final_state = std::move(st);
    return std::move(report_);
  }

private:
  const ProblemSpec& p_;
  const SolverConfig& cfg_;
  ResolvedSteps steps_;
  RunReport report_;
};

SolverState initial_state(const ProblemSpec& p, Index w_size,
                          const SolverState* init) {
  SolverState s;
  const Index n = p.dim();
  const Index v_size = p.B ? p.B->rows() : 0;
  s.x = Vector::Zero(n);
  s.w = Vector::Zero(w_size);
  s.v = Vector::Zero(v_size);
  if (init != nullptr) {
    if (init->x.size() == n) s.x = init->x;
    else if (init->x.size() != 0) detail::throw_dim("warm start x", n, init->x.size());
    if (init->w.size() == w_size) s.w = init->w;
    if (init->v.size() == v_size) s.v = init->v;
  }
  return s;
}

void require_penalty(const ProblemSpec& p,
                     std::initializer_list<PenaltyKind> allowed,
                     const char* solver) {
  for (auto k : allowed) {
    if (p.penalty.kind == k) return;
  }
  throw std::invalid_argument(std::string(solver) +
                              ": unsupported penalty kind for this scheme");
}

void require_identity_a(const ProblemSpec& p, const char* solver) {
  if (p.A != nullptr && p.A->kind() != "identity") {
    throw std::invalid_argument(std::string(solver) +
                                ": requires A = identity (leave A unset)");
  }
}

}  // namespace

Penalty Penalty::separable() { return Penalty{}; }

Penalty Penalty::joint(int m) {
  if (m < 1) throw std::invalid_argument("Penalty::joint: group size must be >= 1");
  Penalty p;
  p.kind = PenaltyKind::JointMaxL1;
  p.group_size = m;
  return p;
}

Penalty Penalty::generic(ProxFn prox) {
  if (!prox.evaluate) {
    throw std::invalid_argument("Penalty::generic: prox has no evaluate");
  }
  Penalty p;
  p.kind = PenaltyKind::GenericProx;
  p.prox = std::move(prox);
  return p;
}

Penalty Penalty::l1_ball(double radius) {
  if (!(radius >= 0)) {
    throw std::invalid_argument("Penalty::l1_ball: radius must be >= 0");
  }
  Penalty p;
  p.kind = PenaltyKind::L1Ball;
  p.radius = radius;
  return p;
}

Index ProblemSpec::dim() const {
  if (!K) throw std::invalid_argument("ProblemSpec: K is required");
  return K->cols();
}

void ProblemSpec::validate() const {
  const Index n = dim();
  if (y.size() != K->rows()) detail::throw_dim("ProblemSpec: y", K->rows(), y.size());
  detail::check_finite(y, "ProblemSpec: y");
  if (A && A->cols() != n) detail::throw_dim("ProblemSpec: A columns", n, A->cols());
  if (B) {
    if (B->cols() != n) detail::throw_dim("ProblemSpec: B columns", n, B->cols());
    if (b.size() != B->rows()) detail::throw_dim("ProblemSpec: b", B->rows(), b.size());
    detail::check_finite(b, "ProblemSpec: b");
  } else if (b.size() != 0) {
    throw std::invalid_argument("ProblemSpec: b given without constraint map B");
  }
  if (!(lambda >= 0)) throw std::invalid_argument("ProblemSpec: lambda must be >= 0");
  if (penalty.kind == PenaltyKind::JointMaxL1) {
    const Index wa = A ? A->rows() : n;
    if (penalty.group_size < 1 || wa % penalty.group_size != 0) {
      throw std::invalid_argument(
          "ProblemSpec: penalty vector length not divisible by the group size");
    }
  }
  if (penalty.kind == PenaltyKind::GenericProx && !penalty.prox.evaluate) {
    throw std::invalid_argument("ProblemSpec: generic penalty without prox");
  }
}

ResolvedSteps resolve_steps(const ProblemSpec& p, const SolverConfig& cfg) {
  p.validate();
  if (!(cfg.alpha > 0.5)) {
    throw std::invalid_argument("SolverConfig: alpha must be > 1/2");
  }
  ResolvedSteps s;
  s.alpha = cfg.alpha;

  double gram = 0.0;
  if (cfg.known_gram_sq_norm) {
    gram = *cfg.known_gram_sq_norm;
  } else {
    // Inflated so the strict step-size inequalities survive estimation error.
    gram = gram_combination_sq_norm(*p.K, p.B.get(), 0.5, 1.0, 1e-9, 5000,
                                    cfg.seed)
               .value *
           1.01;
  }
  s.gram_sq_norm = gram;
  const double t13 = gram > kTinyNorm ? 0.9 / gram : 1.0;
  s.tau1 = cfg.tau1.value_or(t13);
  s.tau3 = cfg.tau3.value_or(t13);

  const bool ident = (p.A == nullptr || p.A->kind() == "identity");
  if (ident) {
    s.penalty_sq_norm = 1.0;
    // The classic thresholding schemes are exactly the A = Id case with unit
    // dual step; this also makes them agree iterate-for-iterate with the
    // full scheme.
    s.tau2 = cfg.tau2.value_or(1.0);
  } else {
    double an = cfg.known_penalty_sq_norm
                    ? *cfg.known_penalty_sq_norm
                    : estimate_sq_norm(*p.A, 1e-9, 5000, cfg.seed).value * 1.01;
    s.penalty_sq_norm = an;
    s.tau2 = cfg.tau2.value_or(an > kTinyNorm ? 0.9 / an : 1.0);
  }
  if (!(s.tau1 > 0) || !(s.tau2 > 0) || !(s.tau3 > 0)) {
    throw std::invalid_argument("SolverConfig: step sizes must be positive");
  }
  return s;
}

RunReport solve_constrained_gist(const ProblemSpec& p, const SolverConfig& cfg,
                                 const SolverState* init) {
  require_penalty(p,
                  {PenaltyKind::SeparableL1, PenaltyKind::JointMaxL1,
                   PenaltyKind::GenericProx},
                  "solve_constrained_gist");
  const ResolvedSteps st = resolve_steps(p, cfg);
  const MapPtr a_map = effective_a(p);
  const bool has_b = p.B != nullptr;
  const double ratio = st.tau2 / st.tau1;
  const double lambda = p.lambda;

  std::function<void(Vector&)> dual_prox;
  switch (p.penalty.kind) {
    case PenaltyKind::SeparableL1:
      dual_prox = [lambda](Vector& u) { u = project_linf(u, lambda); };
      break;
    case PenaltyKind::JointMaxL1: {
      const Index m = p.penalty.group_size;
      dual_prox = [lambda, m](Vector& u) {
        project_l1_groups_inplace(u, m, lambda);
      };
      break;
    }
    case PenaltyKind::GenericProx: {
      const ProxFn prox = p.penalty.prox;
      dual_prox = [prox, ratio](Vector& u) {
        const Vector s = u / ratio;
        u = ratio * (s - prox.evaluate(s, 1.0 / ratio));
      };
      break;
    }
    default:
      break;
  }

  SolverState s = initial_state(p, a_map->rows(), init);
  LoopRunner run(p, cfg, st);

  Vector kx, r, g, bx, vbar, h, base, aw, xbar, ax, u, w_new, x_new, v_new;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    p.K->apply(s.x, kx);
    r = p.y - kx;
    p.K->apply_adjoint(r, g);
    if (has_b) {
      p.B->apply(s.x, bx);
      vbar = s.v - (bx - p.b);
      p.B->apply_adjoint(vbar, h);
      base = s.x + st.tau1 * g + st.tau3 * h;
    } else {
      base = s.x + st.tau1 * g;
    }
    a_map->apply_adjoint(s.w, aw);
    xbar = base - st.tau1 * aw;
    a_map->apply(xbar, ax);
    u = s.w + ratio * ax;
    w_new = u;
    dual_prox(w_new);
    a_map->apply_adjoint(w_new, aw);
    x_new = base - st.tau1 * aw;
    if (has_b) {
      p.B->apply(x_new, bx);
      v_new = s.v - (bx - p.b) / st.alpha;
    }
    if (run.advance(s, x_new, w_new, v_new, it)) break;
  }
  return run.finish(std::move(s));
}

RunReport solve_gist(const ProblemSpec& p, const SolverConfig& cfg,
                     const SolverState* init) {
  if (p.B) {
    throw std::invalid_argument("solve_gist: B must be absent (use solve_constrained_gist)");
  }
  return solve_constrained_gist(p, cfg, init);
}

RunReport solve_ista(const ProblemSpec& p, const SolverConfig& cfg,
                     const SolverState* init) {
  if (p.B) throw std::invalid_argument("solve_ista: B must be absent");
  require_identity_a(p, "solve_ista");
  require_penalty(p, {PenaltyKind::SeparableL1, PenaltyKind::JointMaxL1},
                  "solve_ista");
  const ResolvedSteps st = resolve_steps(p, cfg);
  const double mu = st.tau1 * p.lambda;
  const bool joint = p.penalty.kind == PenaltyKind::JointMaxL1;

  SolverState s = initial_state(p, p.dim(), init);
  LoopRunner run(p, cfg, st);
  Vector kx, r, g, big, x_new, w_new, v_new;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    p.K->apply(s.x, kx);
    r = p.y - kx;
    p.K->apply_adjoint(r, g);
    big = s.x + st.tau1 * g;
    if (joint) {
      x_new = big;
      joint_threshold_groups_inplace(x_new, p.penalty.group_size, mu);
    } else {
      x_new = soft_threshold(big, mu);
    }
    w_new = (big - x_new) / st.tau1;
    if (run.advance(s, x_new, w_new, v_new, it)) break;
  }
  return run.finish(std::move(s));
}

RunReport solve_cista(const ProblemSpec& p, const SolverConfig& cfg,
                      const SolverState* init) {
  if (!p.B) throw std::invalid_argument("solve_cista: constraint map B is required");
  require_identity_a(p, "solve_cista");
  require_penalty(p, {PenaltyKind::SeparableL1, PenaltyKind::JointMaxL1},
                  "solve_cista");
  const ResolvedSteps st = resolve_steps(p, cfg);
  const double mu = st.tau1 * p.lambda;
  const bool joint = p.penalty.kind == PenaltyKind::JointMaxL1;

  SolverState s = initial_state(p, p.dim(), init);
  LoopRunner run(p, cfg, st);
  Vector kx, r, g, bx, vbar, h, big, x_new, w_new, v_new;
  p.B->apply(s.x, bx);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    vbar = s.v - (bx - p.b);
    p.K->apply(s.x, kx);
    r = p.y - kx;
    p.K->apply_adjoint(r, g);
    p.B->apply_adjoint(vbar, h);
    big = s.x + st.tau1 * g + st.tau3 * h;
    if (joint) {
      x_new = big;
      joint_threshold_groups_inplace(x_new, p.penalty.group_size, mu);
    } else {
      x_new = soft_threshold(big, mu);
    }
    p.B->apply(x_new, bx);  // reused as next iteration's Bx
    v_new = s.v - (bx - p.b) / st.alpha;
    w_new = (big - x_new) / st.tau1;
    if (run.advance(s, x_new, w_new, v_new, it)) break;
  }
  return run.finish(std::move(s));
}

RunReport solve_fista(const ProblemSpec& p, const SolverConfig& cfg,
                      const SolverState* init) {
  if (p.B) throw std::invalid_argument("solve_fista: B must be absent");
  require_identity_a(p, "solve_fista");
  require_penalty(p, {PenaltyKind::SeparableL1, PenaltyKind::JointMaxL1},
                  "solve_fista");
  ResolvedSteps st = resolve_steps(p, cfg);
  // The momentum scheme needs the majorization step bound tau1 <= 1/||K^T K||,
  // which is half of what the unaccelerated schemes tolerate.
  if (!cfg.tau1) {
    st.tau1 = st.gram_sq_norm > kTinyNorm ? 0.45 / st.gram_sq_norm : 1.0;
    st.tau3 = st.tau1;
  }
  const double mu = st.tau1 * p.lambda;
  const bool joint = p.penalty.kind == PenaltyKind::JointMaxL1;

  SolverState s = initial_state(p, p.dim(), init);
  LoopRunner run(p, cfg, st);
  Vector z = s.x, kz, r, g, big, x_new, w_new, v_new;
  double t = 1.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    p.K->apply(z, kz);
    r = p.y - kz;
    p.K->apply_adjoint(r, g);
    big = z + st.tau1 * g;
    if (joint) {
      x_new = big;
      joint_threshold_groups_inplace(x_new, p.penalty.group_size, mu);
    } else {
      x_new = soft_threshold(big, mu);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = x_new + ((t - 1.0) / t_next) * (x_new - s.x);
    t = t_next;
    w_new = (big - x_new) / st.tau1;
    if (run.advance(s, x_new, w_new, v_new, it)) break;
  }
  return run.finish(std::move(s));
}

RunReport solve_basis_pursuit(MapPtr B, const Vector& b,
                              const SolverConfig& cfg, double lambda,
                              const SolverState* init) {
  if (!B) throw std::invalid_argument("solve_basis_pursuit: B is required");
  if (!(lambda > 0)) {
    throw std::invalid_argument("solve_basis_pursuit: lambda must be > 0");
  }
  ProblemSpec p;
  p.K = zero(0, B->cols());
  p.B = std::move(B);
  p.y = Vector(0);
  p.b = b;
  p.lambda = lambda;
  return solve_cista(p, cfg, init);
}

RunReport solve_l1_constrained(MapPtr K, const Vector& y, MapPtr B,
                               const Vector& b, double radius,
                               const SolverConfig& cfg,
                               const SolverState* init) {
  if (!(radius >= 0)) {
    throw std::invalid_argument("solve_l1_constrained: radius must be >= 0");
  }
  ProblemSpec p;
  p.K = std::move(K);
  p.B = std::move(B);
  p.y = y;
  p.b = b;
  p.penalty = Penalty::l1_ball(radius);
  const ResolvedSteps st = resolve_steps(p, cfg);
  const bool has_b = p.B != nullptr;

  SolverState s = initial_state(p, 0, init);
  LoopRunner run(p, cfg, st);
  Vector kx, r, g, bx, vbar, h, big, x_new, w_new, v_new;
  if (has_b) p.B->apply(s.x, bx);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    p.K->apply(s.x, kx);
    r = p.y - kx;
    p.K->apply_adjoint(r, g);
    if (has_b) {
      vbar = s.v - (bx - p.b);
      p.B->apply_adjoint(vbar, h);
      big = s.x + st.tau1 * g + st.tau3 * h;
    } else {
      big = s.x + st.tau1 * g;
    }
    x_new = project_l1_ball(big, radius);
    if (has_b) {
      p.B->apply(x_new, bx);
      v_new = s.v - (bx - p.b) / st.alpha;
    }
    if (run.advance(s, x_new, w_new, v_new, it)) break;
  }
  return run.finish(std::move(s));
}

double objective(const ProblemSpec& p, const Vector& x) {
  p.validate();
  if (x.size() != p.dim()) detail::throw_dim("objective: x", p.dim(), x.size());
  if (p.penalty.kind == PenaltyKind::GenericProx && !p.penalty.prox.value) {
    throw std::invalid_argument(
        "objective: generic penalty carries no value function");
  }
  return trace_objective(p, x);
}

KKTResiduals kkt_residuals(const ProblemSpec& p, const ResolvedSteps& steps,
                           const SolverState& s) {
  KKTResiduals out;
  const Index n = p.dim();
  if (s.x.size() != n) detail::throw_dim("kkt_residuals: x", n, s.x.size());

  Vector resid = p.K->apply_adjoint(p.K->apply(s.x) - p.y);
  if (p.B) out.primal_feasibility = (p.B->apply(s.x) - p.b).norm();

  if (p.penalty.kind == PenaltyKind::L1Ball) {
    // Fixed-point residual of the projected iteration.
    Vector inner = s.x - steps.tau1 * resid;
    if (p.B && s.v.size() == p.B->rows()) {
      inner += steps.tau3 * p.B->apply_adjoint(s.v);
    }
    out.stationarity =
        (s.x - project_l1_ball(inner, p.penalty.radius)).norm() / steps.tau1;
    return out;
  }

  const MapPtr a_map = effective_a(p);
  if (s.w.size() == a_map->rows()) {
    resid += a_map->apply_adjoint(s.w);
    const Vector u = s.w + a_map->apply(s.x);
    Vector proj;
    switch (p.penalty.kind) {
      case PenaltyKind::SeparableL1:
        proj = project_linf(u, p.lambda);
        break;
      case PenaltyKind::JointMaxL1:
        proj = u;
        project_l1_groups_inplace(proj, p.penalty.group_size, p.lambda);
        break;
      case PenaltyKind::GenericProx:
        proj = u - p.penalty.prox.evaluate(u, 1.0);
        break;
      default:
        proj = u;
        break;
    }
    out.dual_feasibility = (s.w - proj).norm();
  }
  if (p.B && s.v.size() == p.B->rows()) {
    resid -= (steps.tau3 / steps.tau1) * p.B->apply_adjoint(s.v);
  }
  out.stationarity = resid.norm();
  return out;
}

double lyapunov_value(const ProblemSpec& p, const ResolvedSteps& steps,
                      const SolverState& ref, const SolverState& s) {
  double total = 0.0;
  if (ref.x.size() != s.x.size()) {
    detail::throw_dim("lyapunov_value: x sizes", ref.x.size(), s.x.size());
  }
  const Vector dx = s.x - ref.x;
  total += dx.squaredNorm();
  if (p.B) total -= steps.tau3 * p.B->apply(dx).squaredNorm();

  if (ref.w.size() != 0 && ref.w.size() == s.w.size()) {
    const Vector dw = s.w - ref.w;
    const MapPtr a_map = effective_a(p);
    const double watw = a_map->apply_adjoint(dw).squaredNorm();
    total += (steps.tau1 * steps.tau1 / steps.tau2) *
             (dw.squaredNorm() - steps.tau2 * watw);
  }
  if (ref.v.size() != 0 && ref.v.size() == s.v.size()) {
    total += steps.alpha * steps.tau3 * (s.v - ref.v).squaredNorm();
  }
  if (total < -1e-10) {
    throw std::domain_error(
        "lyapunov_value: indefinite quadratic form (step-size norm conditions "
        "violated)");
  }
  return total;
}

}  // namespace spsolve
