#include "lidarseg/normal_est.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <fmt/core.h>

#include "lidarseg/error.hpp"

namespace lidarseg {

Eigen::Vector3d back_project(double phi, double theta, double range) {
  const double st = std::sin(theta);
  return {range * std::cos(phi) * st, range * std::sin(phi) * st, range * std::cos(theta)};
}

std::size_t NormalMap::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

std::optional<RangeGradients> range_gradients(const SVImage& sv, std::size_t row, std::size_t col,
                                              const NormalOptions& opt) {
  if (row >= sv.height || col >= sv.width || !sv.occupied(row, col)) {
    return std::nullopt;
  }
  std::size_t next_col = col + 1;
  if (next_col == sv.width) {
    if (!opt.wrap_azimuth) {
      return std::nullopt;
    }
    next_col = 0;
  }
  const std::size_t next_row = row + 1;
  if (next_row == sv.height || !sv.occupied(row, next_col) || !sv.occupied(next_row, col)) {
    return std::nullopt;
  }
  const std::size_t c0 = sv.index(row, col);
  const std::size_t cp = sv.index(row, next_col);
  const std::size_t ct = sv.index(next_row, col);

  RangeGradients g;
  g.delta_phi = wrap_angle(sv.cell_phi[cp] - sv.cell_phi[c0]);
  g.delta_theta = sv.cell_theta[ct] - sv.cell_theta[c0];
  if (std::abs(g.delta_phi) < opt.min_angle_step || std::abs(g.delta_theta) < opt.min_angle_step) {
    return std::nullopt;
  }
  g.d_phi = (sv.min_radial[cp] - sv.min_radial[c0]) / g.delta_phi;
  g.d_theta = (sv.min_radial[ct] - sv.min_radial[c0]) / g.delta_theta;
  return g;
}

std::optional<TangentPair> tangents(const SVImage& sv, std::size_t row, std::size_t col,
                                    const NormalOptions& opt) {
  const auto g = range_gradients(sv, row, col, opt);
  if (!g) {
    return std::nullopt;
  }
  const std::size_t c0 = sv.index(row, col);
  const double phi = sv.cell_phi[c0];
  const double theta = sv.cell_theta[c0];
  const double r = sv.min_radial[c0];
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  // d(R u)/d(angle) = dR u + R du, with u the unit ray direction.
  const Eigen::Vector3d ray(cp * st, sp * st, ct);
  TangentPair t;
  t.gradients = *g;
  t.v_phi = g->d_phi * ray + r * Eigen::Vector3d(-sp * st, cp * st, 0.0);
  t.v_theta = g->d_theta * ray + r * Eigen::Vector3d(cp * ct, sp * ct, -st);
  if (!t.v_phi.allFinite() || !t.v_theta.allFinite()) {
    return std::nullopt;
  }
  return t;
}

NormalMap estimate_normals(const SVImage& sv, const NormalOptions& opt) {
  NormalMap nm;
  nm.height = sv.height;
  nm.width = sv.width;
  nm.normal.assign(sv.cells(), Eigen::Vector3d::Zero());
  nm.valid.assign(sv.cells(), 0);
  for (std::size_t row = 0; row < sv.height; ++row) {
    for (std::size_t col = 0; col < sv.width; ++col) {
      const auto t = tangents(sv, row, col, opt);
      if (!t) {
        continue;
      }
      Eigen::Vector3d n = t->v_phi.cross(t->v_theta);
      const double norm = n.norm();
      const double scale = t->v_phi.norm() * t->v_theta.norm();
      if (!(norm > 1e-12 * scale) || !std::isfinite(norm)) {
        continue;
      }
      n /= norm;
      const std::size_t cell = sv.index(row, col);
      const Eigen::Vector3d p = back_project(sv.cell_phi[cell], sv.cell_theta[cell], sv.min_radial[cell]);
      if (n.dot(p) > 0.0) {
        n = -n;
      }
      nm.normal[cell] = n;
      nm.valid[cell] = 1;
    }
  }
  return nm;
}

Tensor to_normal_tensor(const NormalMap& nm) {
  Tensor t(nm.height, nm.width, 4, "sv_normals");
  auto out = t.data();
  for (std::size_t cell = 0; cell < nm.normal.size(); ++cell) {
    if (nm.valid[cell] == 0) {
      continue;
    }
    out[cell * 4 + 0] = static_cast<float>(nm.normal[cell].x());
    out[cell * 4 + 1] = static_cast<float>(nm.normal[cell].y());
    out[cell * 4 + 2] = static_cast<float>(nm.normal[cell].z());
    out[cell * 4 + 3] = 1.0F;
  }
  return t;
}

PointNormals normals_to_points(const LayeredScan& ls, const SVImage& sv, const NormalMap& nm) {
  if (sv.point_cell.size() != ls.size()) {
    throw Error(fmt::format("normals_to_points: raster was built from {} points, scan has {}",
                            sv.point_cell.size(), ls.size()));
  }
  if (nm.height != sv.height || nm.width != sv.width) {
    throw Error("normals_to_points: normal map and raster dimensions differ");
  }
  PointNormals pn;
  pn.normal.assign(ls.size(), Eigen::Vector3d::Zero());
  pn.valid.assign(ls.size(), 0);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const std::size_t cell = sv.point_cell[i];
    if (nm.valid[cell] != 0) {
      pn.normal[i] = nm.normal[cell];
      pn.valid[i] = 1;
    }
  }
  return pn;
}

}  // namespace lidarseg
