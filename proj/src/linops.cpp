#include "spsolve/linops.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>

namespace spsolve {

namespace detail {

void throw_dim(const char* what, Index expected, Index got) {
  std::ostringstream os;
  os << what << ": expected length " << expected << ", got " << got;
  throw std::invalid_argument(os.str());
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

}  // namespace detail

LinearMap::LinearMap(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("LinearMap: negative dimension");
  }
}

void LinearMap::apply(const Vector& x, Vector& out) const {
  if (x.size() != cols_) detail::throw_dim("apply", cols_, x.size());
  do_apply(x, out);
}

void LinearMap::apply_adjoint(const Vector& y, Vector& out) const {
  if (y.size() != rows_) detail::throw_dim("apply_adjoint", rows_, y.size());
  do_apply_adjoint(y, out);
}

Vector LinearMap::apply(const Vector& x) const {
  Vector out;
  apply(x, out);
  return out;
}

Vector LinearMap::apply_adjoint(const Vector& y) const {
  Vector out;
  apply_adjoint(y, out);
  return out;
}

namespace {

class DenseMap final : public LinearMap {
public:
  explicit DenseMap(Matrix m) : LinearMap(m.rows(), m.cols()), m_(std::move(m)) {}
  std::string kind() const override { return "dense-matrix"; }

private:
  void do_apply(const Vector& x, Vector& out) const override {
    out.noalias() = m_ * x;
  }
  void do_apply_adjoint(const Vector& y, Vector& out) const override {
    out.noalias() = m_.transpose() * y;
  }
  Matrix m_;
};

class IdentityMap final : public LinearMap {
public:
  explicit IdentityMap(Index n) : LinearMap(n, n) {}
  std::string kind() const override { return "identity"; }

private:
  void do_apply(const Vector& x, Vector& out) const override { out = x; }
  void do_apply_adjoint(const Vector& y, Vector& out) const override { out = y; }
};

class ZeroMap final : public LinearMap {
public:
  ZeroMap(Index rows, Index cols) : LinearMap(rows, cols) {}
  std::string kind() const override { return "zero"; }

private:
  void do_apply(const Vector&, Vector& out) const override {
    out = Vector::Zero(rows());
  }
  void do_apply_adjoint(const Vector&, Vector& out) const override {
    out = Vector::Zero(cols());
  }
};

class ScaledMap final : public LinearMap {
public:
  ScaledMap(double factor, MapPtr op)
      : LinearMap(op->rows(), op->cols()), factor_(factor), op_(std::move(op)) {}
  std::string kind() const override { return "scaled"; }

private:
  void do_apply(const Vector& x, Vector& out) const override {
    op_->apply(x, out);
    out *= factor_;
  }
  void do_apply_adjoint(const Vector& y, Vector& out) const override {
    op_->apply_adjoint(y, out);
    out *= factor_;
  }
  double factor_;
  MapPtr op_;
};

class CompositionMap final : public LinearMap {
public:
  CompositionMap(MapPtr p, MapPtr q)
      : LinearMap(p->rows(), q->cols()), p_(std::move(p)), q_(std::move(q)) {
    if (p_->cols() != q_->rows()) {
      detail::throw_dim("compose: inner dimensions", p_->cols(), q_->rows());
    }
  }
  std::string kind() const override { return "composition"; }

private:
  void do_apply(const Vector& x, Vector& out) const override {
    Vector tmp;
    q_->apply(x, tmp);
    p_->apply(tmp, out);
  }
  void do_apply_adjoint(const Vector& y, Vector& out) const override {
    Vector tmp;
    p_->apply_adjoint(y, tmp);
    q_->apply_adjoint(tmp, out);
  }
  MapPtr p_;
  MapPtr q_;
};

class StackedMap final : public LinearMap {
public:
  explicit StackedMap(std::vector<MapPtr> parts, Index rows, Index cols)
      : LinearMap(rows, cols), parts_(std::move(parts)) {}
  std::string kind() const override { return "stacked"; }

private:
  void do_apply(const Vector& x, Vector& out) const override {
    out.resize(rows());
    Index at = 0;
    Vector tmp;
    for (const auto& p : parts_) {
      p->apply(x, tmp);
      out.segment(at, p->rows()) = tmp;
      at += p->rows();
    }
  }
  void do_apply_adjoint(const Vector& y, Vector& out) const override {
    out = Vector::Zero(cols());
    Index at = 0;
    Vector tmp;
    for (const auto& p : parts_) {
      p->apply_adjoint(y.segment(at, p->rows()), tmp);
      out += tmp;
      at += p->rows();
    }
  }
  std::vector<MapPtr> parts_;
};

class CallbackMap final : public LinearMap {
public:
  CallbackMap(Index rows, Index cols,
              std::function<void(const Vector&, Vector&)> fwd,
              std::function<void(const Vector&, Vector&)> adj)
      : LinearMap(rows, cols), fwd_(std::move(fwd)), adj_(std::move(adj)) {
    if (!fwd_ || !adj_) {
      throw std::invalid_argument(
          "callback_map: both forward and adjoint callbacks are required");
    }
  }
  std::string kind() const override { return "matrix-free-callback"; }

private:
  void do_apply(const Vector& x, Vector& out) const override { fwd_(x, out); }
  void do_apply_adjoint(const Vector& y, Vector& out) const override {
    adj_(y, out);
  }
  std::function<void(const Vector&, Vector&)> fwd_;
  std::function<void(const Vector&, Vector&)> adj_;
};

}  // namespace

MapPtr dense(Matrix m) { return std::make_shared<DenseMap>(std::move(m)); }

MapPtr identity(Index n) { return std::make_shared<IdentityMap>(n); }

MapPtr zero(Index rows, Index cols) {
  return std::make_shared<ZeroMap>(rows, cols);
}

MapPtr scaled(double factor, MapPtr op) {
  return std::make_shared<ScaledMap>(factor, std::move(op));
}

MapPtr compose(MapPtr p, MapPtr q) {
  return std::make_shared<CompositionMap>(std::move(p), std::move(q));
}

MapPtr vstack(std::vector<MapPtr> parts) {
  if (parts.empty()) throw std::invalid_argument("vstack: no parts");
  Index cols = parts.front()->cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p->cols() != cols) detail::throw_dim("vstack: columns", cols, p->cols());
    rows += p->rows();
  }
  return std::make_shared<StackedMap>(std::move(parts), rows, cols);
}

MapPtr callback_map(Index rows, Index cols,
                    std::function<void(const Vector&, Vector&)> forward,
                    std::function<void(const Vector&, Vector&)> adjoint) {
  return std::make_shared<CallbackMap>(rows, cols, std::move(forward),
                                       std::move(adjoint));
}

Matrix to_dense(const LinearMap& op) {
  Matrix m(op.rows(), op.cols());
  Vector e = Vector::Zero(op.cols());
  Vector col;
  for (Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

namespace {

// Shared power-iteration driver; gram(z, out) must compute out = G z for a
// symmetric positive semidefinite G.
NormEstimate power_iteration(Index dim,
                             const std::function<void(const Vector&, Vector&)>& gram,
                             double tol, int max_iter, std::uint64_t seed) {
  if (tol <= 0) throw std::invalid_argument("power iteration: tol must be > 0");
  if (dim == 0) return {0.0, 0, true};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector z(dim);
  for (Index i = 0; i < dim; ++i) z[i] = uni(rng);
  double nz = z.norm();
  if (nz == 0.0) z[0] = 1.0; else z /= nz;

  NormEstimate est;
  double rayleigh_prev = -1.0;
  Vector gz;
  for (int it = 1; it <= max_iter; ++it) {
    gram(z, gz);
    const double rayleigh = z.dot(gz);  // z has unit norm
    est.value = std::max(rayleigh, 0.0);
    est.iterations_used = it;
    const double gn = gz.norm();
    if (gn == 0.0) {  // start vector is annihilated; the estimate is exact
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    if (it > 1 &&
        std::abs(rayleigh - rayleigh_prev) <= tol * std::max(std::abs(rayleigh), 1e-300)) {
      est.converged = true;
      return est;
    }
    rayleigh_prev = rayleigh;
    z = gz / gn;
  }
  est.converged = false;
  return est;
}

}  // namespace

NormEstimate estimate_sq_norm(const LinearMap& op, double tol, int max_iter,
                              std::uint64_t seed) {
  Vector tmp;
  auto gram = [&op, &tmp](const Vector& z, Vector& out) {
    op.apply(z, tmp);
    op.apply_adjoint(tmp, out);
  };
  return power_iteration(op.cols(), gram, tol, max_iter, seed);
}

NormEstimate gram_combination_sq_norm(const LinearMap& K, const LinearMap* B,
                                      double c_K, double c_B, double tol,
                                      int max_iter, std::uint64_t seed) {
  if (c_K < 0 || c_B < 0) {
    throw std::invalid_argument("gram combination: coefficients must be >= 0");
  }
  if (B != nullptr && B->cols() != K.cols()) {
    detail::throw_dim("gram combination: B columns", K.cols(), B->cols());
  }
  Vector tmp, part;
  auto gram = [&](const Vector& z, Vector& out) {
    K.apply(z, tmp);
    K.apply_adjoint(tmp, out);
    out *= c_K;
    if (B != nullptr && c_B != 0.0) {
      B->apply(z, tmp);
      B->apply_adjoint(tmp, part);
      out += c_B * part;
    }
  };
  return power_iteration(K.cols(), gram, tol, max_iter, seed);
}

}  // namespace spsolve
