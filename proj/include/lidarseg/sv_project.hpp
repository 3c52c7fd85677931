#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lidarseg/layering.hpp"
#include "lidarseg/tensor.hpp"

namespace lidarseg {

struct SphericalCoords {
  double rho = 0.0;    ///< metres
  double phi = 0.0;    ///< azimuth, (-pi, pi]
  double theta = 0.0;  ///< polar angle from zenith, [0, pi]
};

/// phi = atan2(y, x), theta = arccos(z / rho); the origin maps to all zeros.
SphericalCoords to_spherical(double x, double y, double z);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

inline constexpr std::size_t kSvWidth = 2048;

/// Column for an azimuth: floor((phi + pi) / 2pi * width), clamped.
std::size_t sv_column(double phi, std::size_t width = kSvWidth);

/// Spherical-view raster with layer-indexed rows.
///
/// Features are kept in double precision; `to_feature_tensor` narrows them.
/// Empty cells hold 0.0 in every feature and `kNoPoint` as representative.
struct SVImage {
  static constexpr std::int64_t kNoPoint = -1;

  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> min_elevation;
  std::vector<double> mean_reflectivity;
  std::vector<double> min_radial;
  std::vector<std::uint8_t> occupancy;
  /// Azimuth and polar angle of the representative (minimum-range) point.
  std::vector<double> cell_phi;
  std::vector<double> cell_theta;
  std::vector<std::int64_t> cell_point_index;
  std::vector<std::uint32_t> cell_count;
  /// Flat cell index of every scan point.
  std::vector<std::uint32_t> point_cell;

  SVImage() = default;
  SVImage(std::size_t h, std::size_t w);

  [[nodiscard]] std::size_t cells() const noexcept { return height * width; }
  [[nodiscard]] std::size_t index(std::size_t row, std::size_t col) const noexcept {
    return row * width + col;
  }
  [[nodiscard]] bool occupied(std::size_t row, std::size_t col) const noexcept {
    return occupancy[index(row, col)] != 0;
  }
};

/// Ground truth on the layer-indexed grid.
struct SVMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> road;
  std::vector<std::uint8_t> valid;
};

bool is_supported_resolution(std::size_t n_layers);

/// Row = layer index, column from azimuth. Requires 64, 32 or 16 layers.
SVImage project_sv(const LayeredScan& ls);

/// road = some binned point has `road_class`; valid = some point binned.
SVMask project_sv_labels(const LayeredScan& ls, const PointLabels& labels,
                         std::uint32_t road_class);

/// Channels: min_elevation, mean_reflectivity, min_radial, occupancy.
Tensor to_feature_tensor(const SVImage& sv);
/// Channels: phi, theta of the representative point (0 on empty cells).
Tensor to_angle_tensor(const SVImage& sv);
/// Channels: road, valid.
Tensor to_mask_tensor(const SVMask& mask);

/// Occupancy summary of a raster, used to compare projections.
struct ProjectionStats {
  std::size_t height = 0;
  std::size_t points = 0;
  std::size_t dropped = 0;
  std::size_t occupied_cells = 0;
  std::size_t empty_cells = 0;
  /// Points that landed in an already occupied cell.
  std::size_t collisions = 0;
  /// Rows without any point.
  std::size_t empty_rows = 0;
};

ProjectionStats projection_stats(const SVImage& sv, std::size_t points);

/// Conventional evenly discretised spherical view: rows split the vertical
/// field of view [fov_down, fov_up] (elevation, radians) uniformly. Only used
/// to contrast with the layer-indexed raster.
ProjectionStats uniform_projection_stats(const PointCloudScan& scan, std::size_t rows,
                                         double fov_up, double fov_down);

}  // namespace lidarseg
