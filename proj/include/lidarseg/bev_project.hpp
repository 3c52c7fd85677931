#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lidarseg/normal_est.hpp"
#include "lidarseg/point_cloud.hpp"
#include "lidarseg/tensor.hpp"

namespace lidarseg {

/// Bird-eye-view grid: x in [6, 46) m forward, y in [-10, 10) m lateral,
/// 0.10 m cells. Row 0 is the far edge (x -> 46), column 0 is y = -10.
struct BevGrid {
  static constexpr std::size_t kRows = 400;
  static constexpr std::size_t kCols = 200;
  static constexpr double kXMin = 6.0;
  static constexpr double kXMax = 46.0;
  static constexpr double kYMin = -10.0;
  static constexpr double kYMax = 10.0;
  static constexpr double kCell = 0.10;
};

struct BevCell {
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Cell of a ground-plane position, or nullopt outside the half-open grid.
std::optional<BevCell> bev_cell(double x, double y);

enum class BevChannel : std::size_t {
  kPointCount = 0,
  kMeanReflectivity,
  kMeanElevation,
  kStdElevation,
  kMinElevation,
  kMaxElevation,
  kNormalX,
  kNormalY,
  kNormalZ,
};

inline constexpr std::size_t kBevClassicalChannels = 6;
inline constexpr std::size_t kBevNormalChannels = 9;

struct BEVImage {
  bool with_normals = false;
  std::vector<std::uint32_t> point_count;
  std::vector<double> mean_reflectivity;
  std::vector<double> mean_elevation;
  /// Population standard deviation.
  std::vector<double> std_elevation;
  std::vector<double> min_elevation;
  std::vector<double> max_elevation;
  /// Mean of the valid unit normals in the cell; zero when there are none.
  std::vector<Eigen::Vector3d> normal;

  [[nodiscard]] static constexpr std::size_t cells() noexcept { return BevGrid::kRows * BevGrid::kCols; }
  [[nodiscard]] static constexpr std::size_t index(std::size_t row, std::size_t col) noexcept {
    return row * BevGrid::kCols + col;
  }
  [[nodiscard]] std::size_t channels() const noexcept {
    return with_normals ? kBevNormalChannels : kBevClassicalChannels;
  }
};

/// Rasterises a scan. Passing per-point normals adds the three normal channels.
BEVImage project_bev(const PointCloudScan& scan, const PointNormals* normals = nullptr);

Tensor to_tensor(const BEVImage& bev);

struct BEVMask {
  std::vector<std::uint8_t> road;
};

/// Loads an 8-bit 400x200 ground-truth image; road = value > 127.
BEVMask load_bev_gt(const std::filesystem::path& path);

/// Channels: road, valid. `valid` marks every cell unless given.
Tensor to_mask_tensor(const BEVMask& mask, const std::vector<std::uint8_t>* valid = nullptr);

}  // namespace lidarseg
