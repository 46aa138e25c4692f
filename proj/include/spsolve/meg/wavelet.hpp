#pragma once

#include "spsolve/meg/cubed_sphere.hpp"

namespace spsolve::meg {

// Separable 2D biorthogonal CDF 4-2 transform, applied per face and per
// channel through lifting (cubic prediction, two-tap update) with symmetric
// boundary extension.  Coefficients keep the field layout; each level packs
// approximations into the leading block of the face.
class WaveletTransform {
public:
  // n_face dyadic >= 8; 1 <= levels <= log2(n_face) - 2.
  WaveletTransform(int n_face, int levels);

  int levels() const { return levels_; }
  int n_face() const { return n_face_; }
  Index size() const { return 2 * 6 * static_cast<Index>(n_face_) * n_face_; }

  Vector forward(const Vector& field) const;   // analysis: field -> coeffs
  Vector inverse(const Vector& coeffs) const;  // synthesis: coeffs -> field
  Vector inverse_adjoint(const Vector& field) const;

  // Synthesis as a LinearMap (this is the W^-1 the reconstruction works in).
  MapPtr synthesis_map() const;

  static int max_levels(int n_face);

private:
  int n_face_;
  int levels_;
};

}  // namespace spsolve::meg
