#pragma once

#include "spsolve/linops.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace spsolve::meg {

using Vec3 = Eigen::Vector3d;

// Thin spherical shell discretized by the equiangular cubed sphere: six
// logically square faces, n_face x n_face voxels each.  Voxel centers sit at
// mid-shell radius.  Tangential vector fields carry two components per voxel
// in the local orthonormal frame (tangent1, tangent2), stored channel-major:
// component c of voxel q lives at index q + c * voxel_count().
struct CubedSphereGrid {
  int n_face = 0;
  double outer_radius = 0.09;  // m
  double thickness = 0.001;    // m
  std::vector<Vec3> centers;
  std::vector<double> volumes;  // m^3
  std::vector<Vec3> tangent1, tangent2;

  Index voxel_count() const { return static_cast<Index>(centers.size()); }
  Index field_size() const { return 2 * voxel_count(); }
  double shell_radius() const { return outer_radius - 0.5 * thickness; }
  Index voxel_index(int face, int i, int j) const {
    return (static_cast<Index>(face) * n_face + j) * n_face + i;
  }
};

// n_face must be a dyadic power >= 8 (the per-face wavelet transform needs
// dyadic sizes).
CubedSphereGrid build_grid(int n_face, double outer_radius = 0.09,
                           double thickness = 0.001);

struct SensorArray {
  std::vector<Vec3> positions;
  std::vector<Vec3> radial_units;
  Index count() const { return static_cast<Index>(positions.size()); }
};

// Area-uniform sampling of the upper hemisphere at the given radius.
SensorArray sample_sensors(int count, double radius, std::uint64_t seed);

// Discrete surface divergence of a tangential field: one value per voxel.
// Centered differences of the metric-weighted contravariant components in
// each face's local coordinates; at face edges the outside sample is the
// nearest voxel of the adjacent face, read through the local chart.
MapPtr divergence_operator(const CubedSphereGrid& grid);

// Stream-function bump on the sphere; width in radians of arc.
struct Bump {
  Vec3 center;  // unit direction
  double width = 0.3;
  double amplitude = 1.0;
};

// Seeded well-separated bumps for synthetic current models.
std::vector<Bump> random_bumps(int count, std::uint64_t seed);

// Tangential curl of the stream function G * 1_r with G a sum of bumps;
// divergence-free up to discretization error.
Vector make_input_model(const CubedSphereGrid& grid,
                        const std::vector<Bump>& bumps);

namespace detail {

struct ChartPoint {
  Vec3 dir;             // unit direction
  Vec3 pos;             // shell_radius * dir
  Vec3 g_xi, g_eta;     // coordinate basis (includes the radius factor)
  double jac = 0.0;     // signed <g_xi x g_eta, dir>
  Vec3 c_xi, c_eta;     // flux covectors g_eta x dir, dir x g_xi
};

ChartPoint eval_chart(int face, double xi, double eta, double radius);
// Face whose axis is closest to the direction, and its in-face coordinates.
int owning_face(const Vec3& dir, double& xi, double& eta);

}  // namespace detail

}  // namespace spsolve::meg
