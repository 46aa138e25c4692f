#include "spsolve/meg/wavelet.hpp"

#include <cmath>

namespace spsolve::meg {

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Symmetric extension index maps for the even/odd phases of a whole-point
// symmetric signal.  Single reflection is enough for the 4-tap reach.
inline Index reflect_even(Index j, Index half) {
  if (j < 0) j = -j;
  if (j >= half) j = 2 * half - 1 - j;
  return j;
}
inline Index reflect_odd(Index j, Index half) {
  if (j < 0) j = -j - 1;
  if (j >= half) j = 2 * (half - 1) - j;
  return j;
}

// One analysis pass: x[0..len) -> approximations in the left half, details in
// the right half.
void forward1d(double* x, Index len, Index stride) {
  const Index half = len / 2;
  std::vector<double> s(static_cast<std::size_t>(half));
  std::vector<double> d(static_cast<std::size_t>(half));
  for (Index j = 0; j < half; ++j) {
    s[static_cast<std::size_t>(j)] = x[2 * j * stride];
    d[static_cast<std::size_t>(j)] = x[(2 * j + 1) * stride];
  }
  for (Index j = 0; j < half; ++j) {
    d[static_cast<std::size_t>(j)] -=
        (9.0 / 16.0) * (s[static_cast<std::size_t>(reflect_even(j, half))] +
                        s[static_cast<std::size_t>(reflect_even(j + 1, half))]) -
        (1.0 / 16.0) * (s[static_cast<std::size_t>(reflect_even(j - 1, half))] +
                        s[static_cast<std::size_t>(reflect_even(j + 2, half))]);
  }
  for (Index j = 0; j < half; ++j) {
    s[static_cast<std::size_t>(j)] +=
        0.25 * (d[static_cast<std::size_t>(reflect_odd(j - 1, half))] +
                d[static_cast<std::size_t>(reflect_odd(j, half))]);
  }
  for (Index j = 0; j < half; ++j) {
    x[j * stride] = s[static_cast<std::size_t>(j)] * kSqrt2;
    x[(half + j) * stride] = d[static_cast<std::size_t>(j)] / kSqrt2;
  }
}

// Exact inverse of forward1d (reversed lifting steps).
void inverse1d(double* x, Index len, Index stride) {
  const Index half = len / 2;
  std::vector<double> s(static_cast<std::size_t>(half));
  std::vector<double> d(static_cast<std::size_t>(half));
  for (Index j = 0; j < half; ++j) {
    s[static_cast<std::size_t>(j)] = x[j * stride] / kSqrt2;
    d[static_cast<std::size_t>(j)] = x[(half + j) * stride] * kSqrt2;
  }
  for (Index j = 0; j < half; ++j) {
    s[static_cast<std::size_t>(j)] -=
        0.25 * (d[static_cast<std::size_t>(reflect_odd(j - 1, half))] +
                d[static_cast<std::size_t>(reflect_odd(j, half))]);
  }
  for (Index j = 0; j < half; ++j) {
    d[static_cast<std::size_t>(j)] +=
        (9.0 / 16.0) * (s[static_cast<std::size_t>(reflect_even(j, half))] +
                        s[static_cast<std::size_t>(reflect_even(j + 1, half))]) -
        (1.0 / 16.0) * (s[static_cast<std::size_t>(reflect_even(j - 1, half))] +
                        s[static_cast<std::size_t>(reflect_even(j + 2, half))]);
  }
  for (Index j = 0; j < half; ++j) {
    x[2 * j * stride] = s[static_cast<std::size_t>(j)];
    x[(2 * j + 1) * stride] = d[static_cast<std::size_t>(j)];
  }
}

// Adjoint of inverse1d: the lifting shears transpose into scatter-adds, the
// merge transposes into the split.
void inverse_adjoint1d(double* x, Index len, Index stride) {
  const Index half = len / 2;
  std::vector<double> s(static_cast<std::size_t>(half));
  std::vector<double> d(static_cast<std::size_t>(half));
  for (Index j = 0; j < half; ++j) {
    s[static_cast<std::size_t>(j)] = x[2 * j * stride];
    d[static_cast<std::size_t>(j)] = x[(2 * j + 1) * stride];
  }
  // Transpose of "d += P s": s += P^T d.
  for (Index j = 0; j < half; ++j) {
    const double dj = d[static_cast<std::size_t>(j)];
    s[static_cast<std::size_t>(reflect_even(j, half))] += (9.0 / 16.0) * dj;
    s[static_cast<std::size_t>(reflect_even(j + 1, half))] += (9.0 / 16.0) * dj;
    s[static_cast<std::size_t>(reflect_even(j - 1, half))] -= (1.0 / 16.0) * dj;
    s[static_cast<std::size_t>(reflect_even(j + 2, half))] -= (1.0 / 16.0) * dj;
  }
  // Transpose of "s -= U d": d -= U^T s.
  for (Index j = 0; j < half; ++j) {
    const double sj = s[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(reflect_odd(j - 1, half))] -= 0.25 * sj;
    d[static_cast<std::size_t>(reflect_odd(j, half))] -= 0.25 * sj;
  }
  for (Index j = 0; j < half; ++j) {
    x[j * stride] = s[static_cast<std::size_t>(j)] / kSqrt2;
    x[(half + j) * stride] = d[static_cast<std::size_t>(j)] * kSqrt2;
  }
}

enum class Pass { Forward, Inverse, InverseAdjoint };

void run1d(Pass pass, double* x, Index len, Index stride) {
  switch (pass) {
    case Pass::Forward: forward1d(x, len, stride); break;
    case Pass::Inverse: inverse1d(x, len, stride); break;
    case Pass::InverseAdjoint: inverse_adjoint1d(x, len, stride); break;
  }
}

}  // namespace

int WaveletTransform::max_levels(int n_face) {
  int levels = 0;
  int len = n_face;
  while (len >= 8) {
    ++levels;
    len /= 2;
  }
  return levels;
}

WaveletTransform::WaveletTransform(int n_face, int levels)
    : n_face_(n_face), levels_(levels) {
  if (n_face < 8 || (n_face & (n_face - 1)) != 0) {
    throw std::invalid_argument("WaveletTransform: n_face must be dyadic >= 8");
  }
  if (levels < 1 || levels > max_levels(n_face)) {
    throw std::invalid_argument("WaveletTransform: invalid level count");
  }
}

// The three transforms share the face walker; only the 1D pass and the
// level/row-column order change.
namespace {

void transform_face(Pass pass, double* face, Index n, int levels) {
  if (pass == Pass::Forward) {
    Index len = n;
    for (int l = 0; l < levels; ++l, len /= 2) {
      for (Index j = 0; j < len; ++j) run1d(pass, face + j * n, len, 1);
      for (Index i = 0; i < len; ++i) run1d(pass, face + i, len, n);
    }
  } else if (pass == Pass::Inverse) {
    Index len = n >> (levels - 1);
    for (int l = levels - 1; l >= 0; --l, len *= 2) {
      for (Index i = 0; i < len; ++i) run1d(pass, face + i, len, n);
      for (Index j = 0; j < len; ++j) run1d(pass, face + j * n, len, 1);
    }
  } else {  // adjoint of the inverse: levels ascend, rows before columns
    Index len = n;
    for (int l = 0; l < levels; ++l, len /= 2) {
      for (Index j = 0; j < len; ++j) run1d(pass, face + j * n, len, 1);
      for (Index i = 0; i < len; ++i) run1d(pass, face + i, len, n);
    }
  }
}

Vector transform_all(Pass pass, const Vector& in, Index n, int levels) {
  const Index per_face = n * n;
  const Index v = 6 * per_face;
  if (in.size() != 2 * v) {
    spsolve::detail::throw_dim("wavelet transform", 2 * v, in.size());
  }
  Vector out = in;
  for (Index c = 0; c < 2; ++c) {
    for (Index f = 0; f < 6; ++f) {
      transform_face(pass, out.data() + c * v + f * per_face, n, levels);
    }
  }
  return out;
}

}  // namespace

Vector WaveletTransform::forward(const Vector& field) const {
  return transform_all(Pass::Forward, field, n_face_, levels_);
}

Vector WaveletTransform::inverse(const Vector& coeffs) const {
  return transform_all(Pass::Inverse, coeffs, n_face_, levels_);
}

Vector WaveletTransform::inverse_adjoint(const Vector& field) const {
  return transform_all(Pass::InverseAdjoint, field, n_face_, levels_);
}

MapPtr WaveletTransform::synthesis_map() const {
  const WaveletTransform copy = *this;
  return callback_map(
      size(), size(),
      [copy](const Vector& x, Vector& out) { out = copy.inverse(x); },
      [copy](const Vector& y, Vector& out) { out = copy.inverse_adjoint(y); });
}

}  // namespace spsolve::meg
