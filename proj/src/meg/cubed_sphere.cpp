#include "spsolve/meg/cubed_sphere.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <random>

namespace spsolve::meg {

namespace {

constexpr double kQuarterPi = 0.78539816339744830961;

struct FaceFrame {
  Vec3 axis, eu, ev;
};

const std::array<FaceFrame, 6>& faces() {
  static const std::array<FaceFrame, 6> f = {{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}},
      {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},
      {{0, 0, -1}, {1, 0, 0}, {0, -1, 0}},
  }};
  return f;
}

bool is_dyadic(int n) { return n >= 8 && (n & (n - 1)) == 0; }

}  // namespace

namespace detail {

ChartPoint eval_chart(int face, double xi, double eta, double radius) {
  const FaceFrame& f = faces()[static_cast<std::size_t>(face)];
  const double x = std::tan(xi);
  const double y = std::tan(eta);
  const Vec3 u = f.axis + x * f.eu + y * f.ev;
  const double s2 = 1.0 + x * x + y * y;
  const double s = std::sqrt(s2);

  ChartPoint cp;
  cp.dir = u / s;
  cp.pos = radius * cp.dir;
  // d(u/|u|)/dX = eu/s - u X / s^3, times dX/dxi = 1 + X^2.
  const Vec3 dd_dx = (f.eu / s - u * (x / (s2 * s)));
  const Vec3 dd_dy = (f.ev / s - u * (y / (s2 * s)));
  cp.g_xi = radius * (1.0 + x * x) * dd_dx;
  cp.g_eta = radius * (1.0 + y * y) * dd_dy;
  cp.jac = cp.g_xi.cross(cp.g_eta).dot(cp.dir);
  cp.c_xi = cp.g_eta.cross(cp.dir);
  cp.c_eta = cp.dir.cross(cp.g_xi);
  return cp;
}

int owning_face(const Vec3& dir, double& xi, double& eta) {
  int best = 0;
  double best_dot = -2.0;
  for (int f = 0; f < 6; ++f) {
    const double d = dir.dot(faces()[static_cast<std::size_t>(f)].axis);
    if (d > best_dot) {
      best_dot = d;
      best = f;
    }
  }
  const FaceFrame& fr = faces()[static_cast<std::size_t>(best)];
  const double a = dir.dot(fr.axis);
  xi = std::atan(dir.dot(fr.eu) / a);
  eta = std::atan(dir.dot(fr.ev) / a);
  return best;
}

}  // namespace detail

CubedSphereGrid build_grid(int n_face, double outer_radius, double thickness) {
  if (!is_dyadic(n_face)) {
    throw std::invalid_argument(
        "build_grid: n_face must be a power of two >= 8");
  }
  if (!(outer_radius > 0) || !(thickness > 0) || thickness >= outer_radius) {
    throw std::invalid_argument("build_grid: bad shell dimensions");
  }
  CubedSphereGrid g;
  g.n_face = n_face;
  g.outer_radius = outer_radius;
  g.thickness = thickness;
  const Index v = 6 * static_cast<Index>(n_face) * n_face;
  g.centers.resize(static_cast<std::size_t>(v));
  g.volumes.resize(static_cast<std::size_t>(v));
  g.tangent1.resize(static_cast<std::size_t>(v));
  g.tangent2.resize(static_cast<std::size_t>(v));

  const double delta = 2.0 * kQuarterPi / n_face;
  const double rmid = g.shell_radius();
  for (int f = 0; f < 6; ++f) {
    for (int j = 0; j < n_face; ++j) {
      for (int i = 0; i < n_face; ++i) {
        const double xi = -kQuarterPi + (i + 0.5) * delta;
        const double eta = -kQuarterPi + (j + 0.5) * delta;
        const auto cp = detail::eval_chart(f, xi, eta, rmid);
        const auto q = static_cast<std::size_t>(g.voxel_index(f, i, j));
        g.centers[q] = cp.pos;
        g.volumes[q] = std::abs(cp.jac) * delta * delta * thickness;
        const Vec3 t1 = cp.g_xi.normalized();
        g.tangent1[q] = t1;
        g.tangent2[q] = cp.dir.cross(t1);
      }
    }
  }
  return g;
}

SensorArray sample_sensors(int count, double radius, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_sensors: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SensorArray arr;
  arr.positions.reserve(static_cast<std::size_t>(count));
  arr.radial_units.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double z = uni(rng);               // cos(theta), upper hemisphere
    const double phi = 2.0 * M_PI * uni(rng);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(rho * std::cos(phi), rho * std::sin(phi), z);
    arr.positions.push_back(radius * dir);
    arr.radial_units.push_back(dir);
  }
  return arr;
}

MapPtr divergence_operator(const CubedSphereGrid& grid) {
  const int n = grid.n_face;
  const Index v = grid.voxel_count();
  const double delta = 2.0 * kQuarterPi / n;
  const double rmid = grid.shell_radius();

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(24 * v));

  auto coord = [&](int idx) { return -kQuarterPi + (idx + 0.5) * delta; };

  // One weighted tap of a stencil arm: the sample voxel's frame components
  // projected on the flux covector at the sample location.
  auto add_tap = [&](Index row, double weight, Index sample_voxel,
                     const Vec3& covector) {
    const auto q = static_cast<std::size_t>(sample_voxel);
    trips.emplace_back(static_cast<int>(row), static_cast<int>(sample_voxel),
                       weight * covector.dot(grid.tangent1[q]));
    trips.emplace_back(static_cast<int>(row),
                       static_cast<int>(sample_voxel + v),
                       weight * covector.dot(grid.tangent2[q]));
  };

  // Stencil sample at offset (i, j) from face f, possibly outside the face.
  // In-face samples are single voxels.  Outside samples live on the adjacent
  // face: the chart is continued across the edge, the continuation point is
  // located on the owning face and its value taken by bilinear interpolation
  // between that face's voxels (clamped at cube corners).  The covector is
  // always the local chart's, evaluated at the continuation point.
  auto add_arm = [&](Index row, double scale, int f, int i, int j, bool xi_arm) {
    const auto cp = detail::eval_chart(f, coord(i), coord(j), rmid);
    const Vec3& covector = xi_arm ? cp.c_xi : cp.c_eta;
    if (i >= 0 && i < n && j >= 0 && j < n) {
      add_tap(row, scale, grid.voxel_index(f, i, j), covector);
      return;
    }
    double xi2 = 0.0, eta2 = 0.0;
    const int f2 = detail::owning_face(cp.dir, xi2, eta2);
    const double u = (xi2 + kQuarterPi) / delta - 0.5;
    const double w = (eta2 + kQuarterPi) / delta - 0.5;
    const int i0 = std::min(std::max(static_cast<int>(std::floor(u)), 0), n - 2);
    const int j0 = std::min(std::max(static_cast<int>(std::floor(w)), 0), n - 2);
    const double fu = std::min(std::max(u - i0, 0.0), 1.0);
    const double fw = std::min(std::max(w - j0, 0.0), 1.0);
    const double w00 = (1 - fu) * (1 - fw), w10 = fu * (1 - fw);
    const double w01 = (1 - fu) * fw, w11 = fu * fw;
    if (w00 != 0) add_tap(row, scale * w00, grid.voxel_index(f2, i0, j0), covector);
    if (w10 != 0) add_tap(row, scale * w10, grid.voxel_index(f2, i0 + 1, j0), covector);
    if (w01 != 0) add_tap(row, scale * w01, grid.voxel_index(f2, i0, j0 + 1), covector);
    if (w11 != 0) add_tap(row, scale * w11, grid.voxel_index(f2, i0 + 1, j0 + 1), covector);
  };

  for (int f = 0; f < 6; ++f) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Index row = grid.voxel_index(f, i, j);
        const auto cp0 = detail::eval_chart(f, coord(i), coord(j), rmid);
        const double scale = 1.0 / (cp0.jac * 2.0 * delta);
        add_arm(row, scale, f, i + 1, j, true);
        add_arm(row, -scale, f, i - 1, j, true);
        add_arm(row, scale, f, i, j + 1, false);
        add_arm(row, -scale, f, i, j - 1, false);
      }
    }
  }

  auto mat = std::make_shared<Eigen::SparseMatrix<double>>(v, 2 * v);
  mat->setFromTriplets(trips.begin(), trips.end());
  mat->makeCompressed();
  return callback_map(
      v, 2 * v,
      [mat](const Vector& x, Vector& out) { out.noalias() = (*mat) * x; },
      [mat](const Vector& y, Vector& out) {
        out.noalias() = mat->transpose() * y;
      });
}

std::vector<Bump> random_bumps(int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("random_bumps: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Bump> bumps;
  int guard = 0;
  while (static_cast<int>(bumps.size()) < count && guard < 100000) {
    ++guard;
    Vec3 c(uni(rng), uni(rng), uni(rng));
    if (c.norm() < 1e-3) continue;
    c.normalize();
    const double width = 0.25 + 0.1 * std::abs(uni(rng));
    bool separated = true;
    for (const auto& b : bumps) {
      const double angle = std::acos(std::min(1.0, std::max(-1.0, c.dot(b.center))));
      if (angle < 3.0 * std::max(width, b.width)) {
        separated = false;
        break;
      }
    }
    if (!separated) continue;
    Bump b;
    b.center = c;
    b.width = width;
    b.amplitude = (bumps.size() % 2 == 0 ? 1.0 : -1.0) * (0.8 + 0.4 * std::abs(uni(rng)));
    bumps.push_back(b);
  }
  if (static_cast<int>(bumps.size()) < count) {
    throw std::runtime_error("random_bumps: could not place separated bumps");
  }
  return bumps;
}

Vector make_input_model(const CubedSphereGrid& grid,
                        const std::vector<Bump>& bumps) {
  const Index v = grid.voxel_count();
  Vector field = Vector::Zero(2 * v);
  const double rmid = grid.shell_radius();
  for (Index q = 0; q < v; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    const Vec3 dir = grid.centers[qi] / grid.centers[qi].norm();
    // Surface gradient of G at the voxel center, on the shell radius.
    Vec3 grad = Vec3::Zero();
    for (const auto& b : bumps) {
      const double ct = std::min(1.0, std::max(-1.0, dir.dot(b.center)));
      const double theta = std::acos(ct);
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      if (st < 1e-12) continue;  // at the bump center the gradient vanishes
      const Vec3 c_tan = b.center - ct * dir;  // |c_tan| = sin(theta)
      const double gauss = b.amplitude * std::exp(-0.5 * theta * theta /
                                                  (b.width * b.width));
      // grad theta = -c_tan / sin(theta); chain rule through the Gaussian.
      grad += gauss * (theta / (b.width * b.width)) * (c_tan / st);
    }
    grad /= rmid;
    const Vec3 j_vec = grad.cross(dir);  // curl(G 1_r) restricted to the shell
    field[q] = j_vec.dot(grid.tangent1[qi]);
    field[q + v] = j_vec.dot(grid.tangent2[qi]);
  }
  return field;
}

}  // namespace spsolve::meg
