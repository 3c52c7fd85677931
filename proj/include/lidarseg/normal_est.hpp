#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lidarseg/layering.hpp"
#include "lidarseg/sv_project.hpp"
#include "lidarseg/tensor.hpp"

namespace lidarseg {

/// Point on the ray (phi, theta) at range R: R (cos phi sin theta, sin phi sin theta, cos theta).
Eigen::Vector3d back_project(double phi, double theta, double range);

struct NormalOptions {
  /// Column width-1 takes column 0 as its azimuth neighbour.
  bool wrap_azimuth = true;
  /// Angular steps below this (radians) make the gradient undefined.
  double min_angle_step = 1e-6;
};

/// Forward-difference range gradients at one cell (m/rad).
///
/// The azimuth neighbour is the next column, the polar neighbour the next row.
/// Steps come from actual representative angles, not nominal grid spacing.
struct RangeGradients {
  double d_phi = 0.0;
  double d_theta = 0.0;
  double delta_phi = 0.0;
  double delta_theta = 0.0;
};

std::optional<RangeGradients> range_gradients(const SVImage& sv, std::size_t row, std::size_t col,
                                              const NormalOptions& opt = {});

/// Tangents of the surface R(phi, theta) at a cell: partial derivatives of the
/// back-projection with the range derivative replaced by its forward difference.
struct TangentPair {
  Eigen::Vector3d v_phi = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_theta = Eigen::Vector3d::Zero();
  RangeGradients gradients;
};

std::optional<TangentPair> tangents(const SVImage& sv, std::size_t row, std::size_t col,
                                    const NormalOptions& opt = {});

struct NormalMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Eigen::Vector3d> normal;
  std::vector<std::uint8_t> valid;

  [[nodiscard]] std::size_t index(std::size_t row, std::size_t col) const noexcept {
    return row * width + col;
  }
  [[nodiscard]] std::size_t valid_count() const noexcept;
};

/// Unit normal v_phi x v_theta per cell, oriented towards the sensor.
NormalMap estimate_normals(const SVImage& sv, const NormalOptions& opt = {});

/// Channels: normal_x, normal_y, normal_z, valid. Invalid cells are all zero.
Tensor to_normal_tensor(const NormalMap& nm);

struct PointNormals {
  std::vector<Eigen::Vector3d> normal;
  std::vector<std::uint8_t> valid;
};

/// Every point inherits the normal of the cell it was binned into.
PointNormals normals_to_points(const LayeredScan& ls, const SVImage& sv, const NormalMap& nm);

}  // namespace lidarseg
