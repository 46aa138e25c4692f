#include "spsolve/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spsolve {

namespace {

void check_lambda(double lambda, const char* what) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument(std::string(what) + ": lambda must be >= 0");
  }
}

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Indices of z sorted by |z| descending; stable, original index as tie-break.
std::vector<Index> magnitude_order(const Vector& z) {
  std::vector<Index> idx(static_cast<std::size_t>(z.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&z](Index a, Index b) {
    return std::abs(z[a]) > std::abs(z[b]);
  });
  return idx;
}

}  // namespace

Vector soft_threshold(const Vector& z, double lambda) {
  check_lambda(lambda, "soft_threshold");
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]);
    out[i] = a > lambda ? sgn(z[i]) * (a - lambda) : 0.0;
  }
  return out;
}

Vector project_linf(const Vector& z, double lambda) {
  check_lambda(lambda, "project_linf");
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    out[i] = std::abs(z[i]) > lambda ? sgn(z[i]) * lambda : z[i];
  }
  return out;
}

double l1_ball_threshold(const Vector& z, double radius) {
  check_lambda(radius, "l1_ball_threshold");
  const double l1 = z.lpNorm<1>();
  if (l1 <= radius) return 0.0;
  const auto idx = magnitude_order(z);
  // Largest l with |z_{i_l}| >= (sum_{k<=l} |z_{i_k}| - radius) / l.
  double cum = 0.0;
  double t = 0.0;
  for (std::size_t l = 1; l <= idx.size(); ++l) {
    cum += std::abs(z[idx[l - 1]]);
    const double cand = (cum - radius) / static_cast<double>(l);
    if (std::abs(z[idx[l - 1]]) >= cand) t = cand;
  }
  return t;
}

Vector project_l1_ball(const Vector& z, double radius) {
  check_lambda(radius, "project_l1_ball");
  if (z.lpNorm<1>() <= radius) return z;
  return soft_threshold(z, l1_ball_threshold(z, radius));
}

Vector joint_threshold(const Vector& z_row, double lambda) {
  check_lambda(lambda, "joint_threshold");
  if (z_row.lpNorm<1>() <= lambda) return Vector::Zero(z_row.size());
  const auto idx = magnitude_order(z_row);
  double cum = 0.0;
  double t = 0.0;
  std::size_t keep = 0;
  for (std::size_t l = 1; l <= idx.size(); ++l) {
    cum += std::abs(z_row[idx[l - 1]]);
    const double cand = (cum - lambda) / static_cast<double>(l);
    if (std::abs(z_row[idx[l - 1]]) >= cand) {
      t = cand;
      keep = l;
    }
  }
  Vector out = z_row;
  for (std::size_t j = 0; j < keep; ++j) {
    out[idx[j]] = sgn(z_row[idx[j]]) * t;
  }
  return out;
}

GroupedVector grouped_joint_threshold(const GroupedVector& u, double lambda) {
  check_lambda(lambda, "grouped_joint_threshold");
  GroupedVector out(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    out.row(i) = joint_threshold(u.row(i).transpose(), lambda).transpose();
  }
  return out;
}

ProxFn moreau_complement(const ProxFn& p) {
  if (!p.evaluate) {
    throw std::invalid_argument("moreau_complement: prox has no evaluate");
  }
  ProxFn out;
  auto inner = p.evaluate;
  out.evaluate = [inner](const Vector& z, double scale) -> Vector {
    return z - inner(z, scale);
  };
  out.descriptor = "moreau-complement(" + p.descriptor + ")";
  return out;
}

ProxFn l1_norm_prox(double lambda) {
  check_lambda(lambda, "l1_norm_prox");
  ProxFn p;
  p.evaluate = [lambda](const Vector& z, double scale) {
    return soft_threshold(z, scale * lambda);
  };
  p.value = [lambda](const Vector& z) { return lambda * z.lpNorm<1>(); };
  p.descriptor = "l1-norm";
  return p;
}

ProxFn identity_prox() {
  ProxFn p;
  p.evaluate = [](const Vector& z, double) { return z; };
  p.value = [](const Vector&) { return 0.0; };
  p.descriptor = "zero-function";
  return p;
}

ProxFn l1_ball_projection_prox(double radius) {
  check_lambda(radius, "l1_ball_projection_prox");
  ProxFn p;
  // Indicator functions project regardless of scale.
  p.evaluate = [radius](const Vector& z, double) {
    return project_l1_ball(z, radius);
  };
  p.descriptor = "l1-ball-projection";
  return p;
}

}  // namespace spsolve
