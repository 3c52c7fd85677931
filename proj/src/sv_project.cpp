#include "lidarseg/sv_project.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "lidarseg/error.hpp"

namespace lidarseg {

SphericalCoords to_spherical(double x, double y, double z) {
  const double rho = std::sqrt(x * x + y * y + z * z);
  if (rho == 0.0) {
    return {};
  }
  const double c = std::clamp(z / rho, -1.0, 1.0);
  return {rho, std::atan2(y, x), std::acos(c)};
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, kTwoPi);
  if (r <= -std::numbers::pi) {
    r += kTwoPi;
  }
  return r;
}

std::size_t sv_column(double phi, std::size_t width) {
  const double u = (wrap_angle(phi) + std::numbers::pi) / (2.0 * std::numbers::pi);
  const double c = std::floor(u * static_cast<double>(width));
  if (c < 0.0) {
    return 0;
  }
  return std::min(static_cast<std::size_t>(c), width - 1);
}

SVImage::SVImage(std::size_t h, std::size_t w)
    : height(h), width(w), min_elevation(h * w, 0.0), mean_reflectivity(h * w, 0.0),
      min_radial(h * w, 0.0), occupancy(h * w, 0), cell_phi(h * w, 0.0), cell_theta(h * w, 0.0),
      cell_point_index(h * w, kNoPoint), cell_count(h * w, 0) {}

bool is_supported_resolution(std::size_t n_layers) {
  return n_layers == 64 || n_layers == 32 || n_layers == 16;
}

SVImage project_sv(const LayeredScan& ls) {
  if (!is_supported_resolution(ls.n_layers)) {
    throw Error(fmt::format("project_sv: {} layers, expected 64, 32 or 16", ls.n_layers));
  }
  SVImage sv(ls.n_layers, kSvWidth);
  sv.point_cell.resize(ls.size());
  std::vector<double> refl_sum(sv.cells(), 0.0);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const Point& p = ls.scan.points[i];
    const SphericalCoords s = to_spherical(p.x, p.y, p.z);
    const std::size_t cell = sv.index(ls.layer_of[i], sv_column(s.phi, sv.width));
    sv.point_cell[i] = static_cast<std::uint32_t>(cell);
    refl_sum[cell] += p.reflectivity;
    if (sv.cell_count[cell] == 0) {
      sv.min_elevation[cell] = p.z;
      sv.min_radial[cell] = s.rho;
      sv.cell_phi[cell] = s.phi;
      sv.cell_theta[cell] = s.theta;
      sv.cell_point_index[cell] = static_cast<std::int64_t>(i);
      sv.occupancy[cell] = 1;
    } else {
      sv.min_elevation[cell] = std::min<double>(sv.min_elevation[cell], p.z);
      if (s.rho < sv.min_radial[cell]) {
        sv.min_radial[cell] = s.rho;
        sv.cell_phi[cell] = s.phi;
        sv.cell_theta[cell] = s.theta;
        sv.cell_point_index[cell] = static_cast<std::int64_t>(i);
      }
    }
    ++sv.cell_count[cell];
  }
  for (std::size_t cell = 0; cell < sv.cells(); ++cell) {
    if (sv.cell_count[cell] > 0) {
      sv.mean_reflectivity[cell] = refl_sum[cell] / static_cast<double>(sv.cell_count[cell]);
    }
  }
  return sv;
}

SVMask project_sv_labels(const LayeredScan& ls, const PointLabels& labels,
                         std::uint32_t road_class) {
  if (labels.size() != ls.size()) {
    throw Error(fmt::format("project_sv_labels: {} labels for {} points", labels.size(), ls.size()));
  }
  if (!is_supported_resolution(ls.n_layers)) {
    throw Error(fmt::format("project_sv_labels: {} layers, expected 64, 32 or 16", ls.n_layers));
  }
  SVMask mask{ls.n_layers, kSvWidth, std::vector<std::uint8_t>(ls.n_layers * kSvWidth, 0),
              std::vector<std::uint8_t>(ls.n_layers * kSvWidth, 0)};
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const Point& p = ls.scan.points[i];
    const double phi = to_spherical(p.x, p.y, p.z).phi;
    const std::size_t cell = ls.layer_of[i] * kSvWidth + sv_column(phi);
    mask.valid[cell] = 1;
    if (labels.class_id[i] == road_class) {
      mask.road[cell] = 1;
    }
  }
  return mask;
}

Tensor to_feature_tensor(const SVImage& sv) {
  Tensor t(sv.height, sv.width, 4, "sv_classical");
  auto out = t.data();
  for (std::size_t cell = 0; cell < sv.cells(); ++cell) {
    out[cell * 4 + 0] = static_cast<float>(sv.min_elevation[cell]);
    out[cell * 4 + 1] = static_cast<float>(sv.mean_reflectivity[cell]);
    out[cell * 4 + 2] = static_cast<float>(sv.min_radial[cell]);
    out[cell * 4 + 3] = sv.occupancy[cell] != 0 ? 1.0F : 0.0F;
  }
  return t;
}

Tensor to_angle_tensor(const SVImage& sv) {
  Tensor t(sv.height, sv.width, 2, "sv_angles");
  auto out = t.data();
  for (std::size_t cell = 0; cell < sv.cells(); ++cell) {
    out[cell * 2 + 0] = static_cast<float>(sv.cell_phi[cell]);
    out[cell * 2 + 1] = static_cast<float>(sv.cell_theta[cell]);
  }
  return t;
}

Tensor to_mask_tensor(const SVMask& mask) {
  Tensor t(mask.height, mask.width, 2, "sv_gt");
  auto out = t.data();
  for (std::size_t cell = 0; cell < mask.road.size(); ++cell) {
    out[cell * 2 + 0] = mask.road[cell] != 0 ? 1.0F : 0.0F;
    out[cell * 2 + 1] = mask.valid[cell] != 0 ? 1.0F : 0.0F;
  }
  return t;
}

namespace {

ProjectionStats summarize(std::size_t height, std::size_t width,
                          const std::vector<std::uint32_t>& counts, std::size_t points,
                          std::size_t dropped) {
  ProjectionStats st;
  st.height = height;
  st.points = points;
  st.dropped = dropped;
  for (std::size_t r = 0; r < height; ++r) {
    bool any = false;
    for (std::size_t c = 0; c < width; ++c) {
      const auto n = counts[r * width + c];
      if (n > 0) {
        ++st.occupied_cells;
        st.collisions += n - 1;
        any = true;
      }
    }
    if (!any) {
      ++st.empty_rows;
    }
  }
  st.empty_cells = height * width - st.occupied_cells;
  return st;
}

}  // namespace

ProjectionStats projection_stats(const SVImage& sv, std::size_t points) {
  return summarize(sv.height, sv.width, sv.cell_count, points, 0);
}

ProjectionStats uniform_projection_stats(const PointCloudScan& scan, std::size_t rows,
                                         double fov_up, double fov_down) {
  if (rows == 0 || !(fov_up > fov_down)) {
    throw Error("uniform_projection_stats: need rows > 0 and fov_up > fov_down");
  }
  std::vector<std::uint32_t> counts(rows * kSvWidth, 0);
  std::size_t dropped = 0;
  const double span = fov_up - fov_down;
  for (const Point& p : scan.points) {
    const SphericalCoords s = to_spherical(p.x, p.y, p.z);
    if (s.rho == 0.0) {
      ++dropped;
      continue;
    }
    const double elevation = std::numbers::pi / 2.0 - s.theta;
    const double v = (fov_up - elevation) / span * static_cast<double>(rows);
    if (v < 0.0 || v >= static_cast<double>(rows) + 1e-9) {
      ++dropped;
      continue;
    }
    const auto row = std::min(static_cast<std::size_t>(v), rows - 1);
    ++counts[row * kSvWidth + sv_column(s.phi)];
  }
  return summarize(rows, kSvWidth, counts, scan.size(), dropped);
}

}  // namespace lidarseg
