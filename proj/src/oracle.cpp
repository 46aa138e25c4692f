#include "spsolve/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace spsolve::oracle {

namespace {

constexpr double kSignSlack = 1e-10;

double pattern_objective(const Matrix& k_mat, const Vector& y,
                         const Matrix& a_mat, double lambda, const Vector& x) {
  return (k_mat * x - y).squaredNorm() + 2.0 * lambda * (a_mat * x).lpNorm<1>();
}

}  // namespace

OracleSolution solve_tiny(const ProblemSpec& p) {
  p.validate();
  if (p.penalty.kind != PenaltyKind::SeparableL1) {
    throw std::invalid_argument("oracle::solve_tiny: separable-l1 penalty only");
  }
  const Index n = p.dim();
  if (n > 6) throw std::invalid_argument("oracle::solve_tiny: dim must be <= 6");

  const Matrix k_mat = to_dense(*p.K);
  const Matrix a_mat = p.A ? to_dense(*p.A) : Matrix::Identity(n, n);
  const Index pr = a_mat.rows();
  if (pr > 8) throw std::invalid_argument("oracle::solve_tiny: A has too many rows");
  const bool has_b = p.B != nullptr;
  const Matrix b_mat = has_b ? to_dense(*p.B) : Matrix(0, n);
  const Index mb = b_mat.rows();
  const double lambda = p.lambda;

  long total = 1;
  for (Index i = 0; i < pr; ++i) total *= 3;

  OracleSolution best;
  bool found = false;
  std::vector<int> signs(static_cast<std::size_t>(pr), 0);

  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<Index> zero_set;
    for (Index i = 0; i < pr; ++i) {
      signs[static_cast<std::size_t>(i)] = static_cast<int>(c % 3) - 1;
      if (signs[static_cast<std::size_t>(i)] == 0) zero_set.push_back(i);
      c /= 3;
    }
    const Index nz = static_cast<Index>(zero_set.size());
    const Index dim = n + nz + mb;

    // Unknowns [x; w_Z; v]; equations are stationarity, (Ax)_Z = 0, Bx = b.
    Matrix sys = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);
    sys.topLeftCorner(n, n) = k_mat.transpose() * k_mat;
    for (Index j = 0; j < nz; ++j) {
      sys.block(0, n + j, n, 1) = a_mat.row(zero_set[j]).transpose();
    }
    if (mb > 0) sys.topRightCorner(n, mb) = -b_mat.transpose();
    rhs.head(n) = k_mat.transpose() * p.y;
    for (Index i = 0; i < pr; ++i) {
      if (signs[static_cast<std::size_t>(i)] != 0) {
        rhs.head(n) -= lambda * signs[static_cast<std::size_t>(i)] *
                       a_mat.row(i).transpose();
      }
    }
    for (Index j = 0; j < nz; ++j) {
      sys.block(n + j, 0, 1, n) = a_mat.row(zero_set[j]);
    }
    if (mb > 0) {
      sys.bottomLeftCorner(mb, n) = b_mat;
      rhs.tail(mb) = p.b;
    }

    const Vector sol = sys.completeOrthogonalDecomposition().solve(rhs);
    const double scale = std::max(1.0, rhs.norm());
    if ((sys * sol - rhs).norm() > 1e-8 * scale) continue;  // inconsistent pattern

    const Vector x = sol.head(n);
    const Vector ax = a_mat * x;
    bool ok = true;
    for (Index i = 0; i < pr && ok; ++i) {
      const int si = signs[static_cast<std::size_t>(i)];
      if (si == 0) continue;
      if (si * ax[i] < -kSignSlack) ok = false;
    }
    for (Index j = 0; j < nz && ok; ++j) {
      if (std::abs(sol[n + j]) > lambda + kSignSlack) ok = false;
      if (std::abs(ax[zero_set[j]]) > 1e-8) ok = false;
    }
    if (!ok) continue;

    const double obj = pattern_objective(k_mat, p.y, a_mat, lambda, x);
    if (!found || obj < best.objective) {
      found = true;
      best.x = x;
      best.objective = obj;
      best.active_signs = signs;
      // Reconstruct the full dual pair and verify the variational equations.
      SolverState st;
      st.x = x;
      st.w = Vector(pr);
      for (Index i = 0; i < pr; ++i) {
        const int si = signs[static_cast<std::size_t>(i)];
        st.w[i] = si != 0 ? lambda * si : 0.0;
      }
      for (Index j = 0; j < nz; ++j) st.w[zero_set[j]] = sol[n + j];
      st.v = mb > 0 ? Vector(sol.tail(mb)) : Vector();
      const KKTResiduals res = kkt_residuals(p, ResolvedSteps{}, st);
      best.kkt_ok = res.stationarity < 1e-9 && res.dual_feasibility < 1e-9 &&
                    res.primal_feasibility < 1e-9;
    }
  }
  if (!found) {
    throw std::runtime_error(
        "oracle::solve_tiny: no KKT-consistent sign pattern (numerical "
        "degeneracy)");
  }
  return best;
}

Vector project_l1(const Vector& z, double radius) {
  if (!(radius >= 0)) {
    throw std::invalid_argument("oracle::project_l1: radius must be >= 0");
  }
  if (z.lpNorm<1>() <= radius) return z;
  double lo = 0.0, hi = z.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (lo + hi);
    double excess = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      excess += std::max(std::abs(z[i]) - t, 0.0);
    }
    if (excess > radius) lo = t; else hi = t;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  const double t = 0.5 * (lo + hi);
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - t;
    out[i] = a > 0 ? (z[i] > 0 ? a : -a) : 0.0;
  }
  return out;
}

OracleSolution basis_pursuit_tiny(const LinearMap& B, const Vector& b) {
  const Index n = B.cols();
  const Index m = B.rows();
  if (n > 12 || m > 8) {
    throw std::invalid_argument("oracle::basis_pursuit_tiny: size caps are n <= 12, rows <= 8");
  }
  if (b.size() != m) detail::throw_dim("oracle::basis_pursuit_tiny: b", m, b.size());
  const Matrix bm = to_dense(B);
  const double bscale = std::max(1.0, b.norm());

  OracleSolution best;
  bool found = false;
  const Index max_support = std::min(n, m);

  // Supports are enumerated as bitmasks; an LP optimum is attained at a basic
  // solution, so supports of size <= rows suffice.
  for (long mask = 0; mask < (1L << n); ++mask) {
    const int size = __builtin_popcountl(static_cast<unsigned long>(mask));
    if (size > max_support) continue;
    std::vector<Index> sup;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1L << j)) sup.push_back(j);
    }
    Matrix bs(m, size);
    for (int j = 0; j < size; ++j) bs.col(j) = bm.col(sup[static_cast<std::size_t>(j)]);
    Vector xs;
    if (size == 0) {
      xs = Vector(0);
    } else {
      xs = bs.completeOrthogonalDecomposition().solve(b);
    }
    const Vector feas_resid = size == 0 ? Vector(-b) : Vector(bs * xs - b);
    if (feas_resid.norm() > 1e-9 * bscale) continue;
    Vector x = Vector::Zero(n);
    for (int j = 0; j < size; ++j) x[sup[static_cast<std::size_t>(j)]] = xs[j];
    const double l1 = x.lpNorm<1>();
    if (!found || l1 < best.objective - 1e-14) {
      found = true;
      best.x = x;
      best.objective = l1;
      best.active_signs.assign(static_cast<std::size_t>(n), 0);
      for (Index j = 0; j < n; ++j) {
        best.active_signs[static_cast<std::size_t>(j)] =
            x[j] > 0 ? 1 : (x[j] < 0 ? -1 : 0);
      }
      best.kkt_ok = true;
    }
  }
  if (!found) {
    throw std::runtime_error("oracle::basis_pursuit_tiny: system is infeasible");
  }
  return best;
}

double sq_norm_eig(const LinearMap& op) {
  const Matrix m = to_dense(op);
  const Matrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("oracle::sq_norm_eig: eigen-decomposition failed");
  }
  return eig.eigenvalues().maxCoeff();
}

Vector constrained_least_squares(const LinearMap& K, const Vector& y,
                                 const LinearMap& B, const Vector& b) {
  const Index n = K.cols();
  const Matrix km = to_dense(K);
  const Matrix bm = to_dense(B);
  const Index mb = bm.rows();
  Matrix sys = Matrix::Zero(n + mb, n + mb);
  sys.topLeftCorner(n, n) = 2.0 * km.transpose() * km;
  sys.topRightCorner(n, mb) = bm.transpose();
  sys.bottomLeftCorner(mb, n) = bm;
  Vector rhs(n + mb);
  rhs.head(n) = 2.0 * km.transpose() * y;
  rhs.tail(mb) = b;
  const Vector sol = sys.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(n);
}

}  // namespace spsolve::oracle
