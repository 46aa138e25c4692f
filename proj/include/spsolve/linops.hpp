#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace spsolve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Linear operator with forward and adjoint application.  Concrete kinds are
// created through the factory functions below; all of them are immutable
// after construction and safe to apply concurrently.
class LinearMap {
public:
  virtual ~LinearMap() = default;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  // out = A x.  Dimension mismatches throw std::invalid_argument with sizes.
  void apply(const Vector& x, Vector& out) const;
  // out = A^T y.
  void apply_adjoint(const Vector& y, Vector& out) const;

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

  virtual std::string kind() const = 0;

protected:
  LinearMap(Index rows, Index cols);

  virtual void do_apply(const Vector& x, Vector& out) const = 0;
  virtual void do_apply_adjoint(const Vector& y, Vector& out) const = 0;

private:
  Index rows_;
  Index cols_;
};

using MapPtr = std::shared_ptr<const LinearMap>;

MapPtr dense(Matrix m);
MapPtr identity(Index n);
MapPtr zero(Index rows, Index cols);
MapPtr scaled(double factor, MapPtr op);
// (p ∘ q) x = p(q(x))
MapPtr compose(MapPtr p, MapPtr q);
// Vertical stack: x -> [p0 x; p1 x; ...].  All parts share the column count.
MapPtr vstack(std::vector<MapPtr> parts);
// Matrix-free map from user callbacks; both directions must be supplied.
MapPtr callback_map(Index rows, Index cols,
                    std::function<void(const Vector&, Vector&)> forward,
                    std::function<void(const Vector&, Vector&)> adjoint);

// Materialize the operator column by column (test/diagnostic use).
Matrix to_dense(const LinearMap& op);

struct NormEstimate {
  double value = 0.0;  // estimated squared spectral norm
  int iterations_used = 0;
  bool converged = false;
};

// Power iteration on op^T op from a seeded random start vector.
// value estimates ||op||^2; relative Rayleigh-quotient change < tol stops it.
NormEstimate estimate_sq_norm(const LinearMap& op, double tol = 1e-8,
                              int max_iter = 5000, std::uint64_t seed = 0);

// Spectral norm of c_K K^T K + c_B B^T B (B may be null).  This is the
// quantity the step-size conditions bound.
NormEstimate gram_combination_sq_norm(const LinearMap& K, const LinearMap* B,
                                      double c_K, double c_B, double tol = 1e-8,
                                      int max_iter = 5000,
                                      std::uint64_t seed = 0);

namespace detail {
[[noreturn]] void throw_dim(const char* what, Index expected, Index got);
void check_finite(const Vector& v, const char* what);
}  // namespace detail

}  // namespace spsolve
