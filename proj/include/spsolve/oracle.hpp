#pragma once

#include "spsolve/solvers.hpp"

#include <vector>

// Brute-force reference solvers for tests.  Everything here is exact at tiny
// scale and deliberately shares no code with the iterative solvers.
namespace spsolve::oracle {

struct OracleSolution {
  Vector x;
  double objective = 0.0;
  std::vector<int> active_signs;  // per penalty coordinate, in {-1, 0, +1}
  bool kkt_ok = false;
};

// Exhaustive KKT verification over all 3^p sign patterns of Ax (p = rows of
// A).  Requires dim <= 6, separable-l1 penalty, A identity or small dense.
OracleSolution solve_tiny(const ProblemSpec& p);

// l1-ball projection via bisection on the Lagrange threshold; an
// algorithmically distinct route from the sort-based implementation.
Vector project_l1(const Vector& z, double radius);

// Minimal l1-norm solution of Bx = b by support enumeration (dim <= 12,
// rows <= 8).  objective carries ||x||_1.
OracleSolution basis_pursuit_tiny(const LinearMap& B, const Vector& b);

// ||op||^2 through a dense symmetric eigen-decomposition of op^T op.
double sq_norm_eig(const LinearMap& op);

// Equality-constrained least squares via the dense KKT system (least-norm
// solution when degenerate).
Vector constrained_least_squares(const LinearMap& K, const Vector& y,
                                 const LinearMap& B, const Vector& b);

}  // namespace spsolve::oracle
