#pragma once

#include "spsolve/linops.hpp"

#include <functional>
#include <string>

namespace spsolve {

// N groups of m channels each, one group per row.
using GroupedVector = Matrix;

// Componentwise shrink toward zero by lambda; entries with |z_i| <= lambda
// become zero.
Vector soft_threshold(const Vector& z, double lambda);

// Componentwise clamp to [-lambda, lambda].
Vector project_linf(const Vector& z, double lambda);

// Euclidean projection onto { u : ||u||_1 <= radius }, by the
// sort-and-threshold rule.
Vector project_l1_ball(const Vector& z, double radius);

// Lagrange threshold t >= 0 with sum_i max(|z_i| - t, 0) = radius (0 when z is
// already inside the ball).  project_l1_ball equals soft_threshold at this t.
double l1_ball_threshold(const Vector& z, double radius);

// Joint thresholding of one m-channel group: zero if ||z||_1 <= lambda,
// otherwise the top entries by magnitude are pulled to a common level and the
// rest pass through.  Equals z - project_l1_ball(z, lambda).
Vector joint_threshold(const Vector& z_row, double lambda);

// joint_threshold applied independently to each row.
GroupedVector grouped_joint_threshold(const GroupedVector& u, double lambda);

// Proximity operator of some convex H, evaluated at an arbitrary scale:
// evaluate(u, s) = prox_{sH}(u) = argmin_w s H(w) + ||w - u||^2 / 2.
struct ProxFn {
  std::function<Vector(const Vector&, double)> evaluate;
  // H itself, when known; used only for objective reporting.
  std::function<double(const Vector&)> value;
  std::string descriptor;
};

// prox of the conjugate via Moreau: z - p(z, s).
ProxFn moreau_complement(const ProxFn& p);

ProxFn l1_norm_prox(double lambda);       // H = lambda ||.||_1
ProxFn identity_prox();                   // H = 0
ProxFn l1_ball_projection_prox(double radius);  // H = indicator of the ball

}  // namespace spsolve
