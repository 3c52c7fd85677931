#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lidarseg/point_cloud.hpp"

namespace lidarseg {

/// Azimuth of every point, atan2(y, x) in (-pi, pi].
struct AzimuthTrace {
  std::vector<double> phi;
  /// Points with x = y = 0, whose azimuth is defined as 0.
  std::size_t degenerate = 0;
};

/// A scan annotated with the scanner layer that acquired each point.
///
/// Layer 0 is the first layer in storage order (the topmost beam for KITTI).
struct LayeredScan {
  PointCloudScan scan;
  std::vector<std::uint16_t> layer_of;
  std::size_t n_layers = 0;
  /// Index of each point in the scan assign_layers was run on.
  std::vector<std::uint32_t> origin;

  [[nodiscard]] std::size_t size() const noexcept { return scan.size(); }
  [[nodiscard]] std::vector<std::size_t> layer_point_counts() const;
};

AzimuthTrace compute_azimuth(const PointCloudScan& scan);

/// Recovers layer indices from acquisition order.
///
/// The azimuth trace is unwrapped along the dominant rotation direction and a
/// new layer begins once the accumulated rotation since the current layer's
/// first point reaches 2*pi. A seam crossing (a jump larger than pi against the
/// rotation direction) also closes the layer when at least 3*pi/2 of rotation
/// has been accumulated, which absorbs small per-ring start offsets.
LayeredScan assign_layers(PointCloudScan scan);

/// Keeps the layers l with l % keep_every == offset and renumbers them densely.
LayeredScan subsample(const LayeredScan& ls, int keep_every, int offset = 0);

}  // namespace lidarseg
