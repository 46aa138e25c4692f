#include "spsolve/meg/biot_savart.hpp"

#include <cmath>

namespace spsolve::meg {

namespace {
constexpr double kMu0Over4Pi = 1e-7;  // mu0 = 4 pi x 1e-7 Vs/Am
}

double biot_savart_kernel(const Vec3& sensor, const Vec3& sensor_radial,
                          const Vec3& source, const Vec3& direction,
                          double volume) {
  const Vec3 diff = sensor - source;
  const double dist = diff.norm();
  const Vec3 kernel = diff.cross(sensor_radial) / (dist * dist * dist);
  return kMu0Over4Pi * volume * kernel.dot(direction);
}

MapPtr biot_savart_operator(const CubedSphereGrid& grid,
                            const SensorArray& sensors) {
  const Index v = grid.voxel_count();
  const Index rows = sensors.count();
  Matrix k(rows, 2 * v);
  for (Index s = 0; s < rows; ++s) {
    const auto si = static_cast<std::size_t>(s);
    const Vec3& rs = sensors.positions[si];
    const Vec3& er = sensors.radial_units[si];
    for (Index q = 0; q < v; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      const Vec3 diff = rs - grid.centers[qi];
      const double dist = diff.norm();
      if (dist < 1e-9) {
        throw std::invalid_argument(
            "biot_savart_operator: sensor coincides with a voxel center");
      }
      const Vec3 kern =
          kMu0Over4Pi * grid.volumes[qi] / (dist * dist * dist) * diff.cross(er);
      k(s, q) = kern.dot(grid.tangent1[qi]);
      k(s, q + v) = kern.dot(grid.tangent2[qi]);
    }
  }
  return dense(std::move(k));
}

}  // namespace spsolve::meg
