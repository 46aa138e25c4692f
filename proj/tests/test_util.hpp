#pragma once

#include "spsolve/linops.hpp"

#include <random>

namespace spsolve::testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector random_vector(std::mt19937_64& g, Index n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(g);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& g, Index rows, Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(g);
  return m;
}

}  // namespace spsolve::testutil
