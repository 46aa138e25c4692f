#pragma once

#include "spsolve/meg/cubed_sphere.hpp"

namespace spsolve::meg {

// Radial magnetic field at one sensor produced by a unit current along
// `direction` in a voxel of volume `volume` at `source` (midpoint rule).
double biot_savart_kernel(const Vec3& sensor, const Vec3& sensor_radial,
                          const Vec3& source, const Vec3& direction,
                          double volume);

// Dense map from tangential current fields (2 per voxel, channel-major) to
// the radial field values at the sensors, in Tesla.
MapPtr biot_savart_operator(const CubedSphereGrid& grid,
                            const SensorArray& sensors);

}  // namespace spsolve::meg
