#include "spsolve/meg/experiment.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace spsolve;
using namespace spsolve::meg;

TEST_CASE("noise injection hits the requested level exactly") {
  auto g = testutil::rng(61);
  Vector y = testutil::random_vector(g, 40, 2.0);

  auto silent = add_noise(y, 0.0, 5);
  CHECK((silent.y_noisy - y).norm() == 0.0);
  CHECK(silent.eps_norm == 0.0);

  auto noisy = add_noise(y, 0.1, 5);
  CHECK(std::abs((noisy.y_noisy - y).norm() - 0.1 * y.norm()) <
        1e-12 * y.norm());
  CHECK(noisy.eps_norm == doctest::Approx(0.1 * y.norm()));

  auto again = add_noise(y, 0.1, 5);
  CHECK((again.y_noisy - noisy.y_noisy).norm() == 0.0);
  auto other = add_noise(y, 0.1, 6);
  CHECK((other.y_noisy - noisy.y_noisy).norm() > 0.0);

  CHECK_THROWS_AS(add_noise(y, -0.1, 5), std::invalid_argument);
}

namespace {

// Synthetic residual curve: monotone in lambda, solved instantly.
LambdaSolve fake_solver(double floor_resid, double ceil_resid) {
  return [floor_resid, ceil_resid](double lambda, const SolverState*) {
    RunReport rep;
    rep.converged = true;
    rep.final_state.x = Vector::Zero(1);
    const double t = lambda / (1.0 + lambda);
    const double resid = floor_resid + (ceil_resid - floor_resid) * t;
    return std::make_pair(rep, resid);
  };
}

}  // namespace

TEST_CASE("lambda tuning brackets and bisects the residual curve") {
  auto tuned = tune_lambda(fake_solver(0.1, 1.0), 0.5, 0.02, 10.0);
  CHECK(std::abs(tuned.residual - 0.5) <= 0.01);
  // target = residual at the upper hint: returned immediately.
  auto at_top = tune_lambda(fake_solver(0.1, 1.0), 1.0 * (1.0 - 1e-4), 0.02, 1e9);
  CHECK(at_top.solves == 1);
}

TEST_CASE("lambda tuning reports unreachable targets with the range") {
  CHECK_THROWS_WITH_AS(tune_lambda(fake_solver(0.1, 1.0), 2.0, 0.02, 10.0),
                       doctest::Contains("exceeds the achievable residual"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(tune_lambda(fake_solver(0.1, 1.0), 0.01, 0.02, 10.0),
                       doctest::Contains("below the achievable residual"),
                       std::runtime_error);
  CHECK_THROWS_AS(tune_lambda(fake_solver(0.1, 1.0), -1.0, 0.02, 10.0),
                  std::invalid_argument);
}

TEST_CASE("reduced-scale case runs reproduce and satisfy the discrepancy") {
  ExperimentSetup setup(8, 60, 1, 11, 22);
  CHECK(setup.k_total->cols() == setup.grid.field_size());
  CHECK(setup.b_total->rows() == setup.grid.voxel_count());

  auto noise = add_noise(setup.y_clean, 0.1, 33);
  CaseBudgets budgets;
  budgets.fista = 400;
  budgets.constrained = 3000;

  auto res_a = run_case('a', setup, noise.y_noisy, noise.eps_norm, budgets, 0.05);
  CHECK(std::abs(res_a.report.residual - noise.eps_norm) <=
        0.05 * noise.eps_norm);
  CHECK(res_a.report.nnz > 0);
  CHECK(res_a.report.e_rec > 0.0);

  auto res_b = run_case('b', setup, noise.y_noisy, noise.eps_norm, budgets, 0.05);
  CHECK(res_b.report.div_norm < res_a.report.div_norm);
  CHECK(res_b.report.nnz > res_a.report.nnz);

  // Determinism of the full case pipeline.
  auto res_a2 = run_case('a', setup, noise.y_noisy, noise.eps_norm, budgets, 0.05);
  CHECK(res_a.report.e_rec == res_a2.report.e_rec);
  CHECK(res_a.report.lambda_used == res_a2.report.lambda_used);
  CHECK((res_a.coeffs - res_a2.coeffs).norm() == 0.0);

  CHECK_THROWS_AS(run_case('x', setup, noise.y_noisy, noise.eps_norm, budgets),
                  std::invalid_argument);
}

TEST_CASE("noiseless fixed-lambda runs are reproducible") {
  ExperimentSetup setup(8, 60, 1, 11, 22);
  CaseBudgets budgets;
  budgets.fista = 300;
  const double tiny_lambda =
      setup.k_total->apply_adjoint(setup.y_clean).lpNorm<Eigen::Infinity>() * 1e-6;
  auto r1 = run_case('a', setup, setup.y_clean, 0.0, budgets, 0.02, tiny_lambda);
  auto r2 = run_case('a', setup, setup.y_clean, 0.0, budgets, 0.02, tiny_lambda);
  CHECK(r1.report.e_rec == r2.report.e_rec);
  CHECK((r1.field - r2.field).norm() == 0.0);
  // Severely under-determined: the data fit is excellent even though the
  // model error stays large.
  CHECK(r1.report.residual < 1e-3 * setup.y_clean.norm());
}

TEST_CASE("constraint trace decays over the late iterations") {
  auto g = testutil::rng(62);
  ProblemSpec p;
  p.K = dense(testutil::random_matrix(g, 5, 8) / 3.0);
  Matrix bm = testutil::random_matrix(g, 2, 8) / 3.0;
  p.B = dense(bm);
  p.b = bm * testutil::random_vector(g, 8);
  p.y = testutil::random_vector(g, 5);
  p.lambda = 0.15;
  SolverConfig c;
  c.max_iter = 4000;
  c.rel_tol = 0.0;
  c.trace_every = 10;
  auto rep = solve_cista(p, c);
  const std::size_t tail = rep.constraint_norm_trace.size() / 10;
  for (std::size_t i = rep.constraint_norm_trace.size() - tail;
       i < rep.constraint_norm_trace.size(); ++i) {
    CHECK(rep.constraint_norm_trace[i] <=
          rep.constraint_norm_trace[i - 1] + 1e-12);
  }
}
