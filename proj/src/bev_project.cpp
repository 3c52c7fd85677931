#include "lidarseg/bev_project.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "lidarseg/error.hpp"
#include "lidarseg/image_io.hpp"

namespace lidarseg {

std::optional<BevCell> bev_cell(double x, double y) {
  if (!(x >= BevGrid::kXMin && x < BevGrid::kXMax && y >= BevGrid::kYMin && y < BevGrid::kYMax)) {
    return std::nullopt;
  }
  // x == 6 sits on the closing edge of the last row.
  const auto row = std::min(static_cast<std::size_t>(std::floor((BevGrid::kXMax - x) / BevGrid::kCell)),
                            BevGrid::kRows - 1);
  const auto col = std::min(static_cast<std::size_t>(std::floor((y - BevGrid::kYMin) / BevGrid::kCell)),
                            BevGrid::kCols - 1);
  return BevCell{row, col};
}

BEVImage project_bev(const PointCloudScan& scan, const PointNormals* normals) {
  if (normals != nullptr && normals->normal.size() != scan.size()) {
    throw Error(fmt::format("project_bev: {} normals for {} points", normals->normal.size(),
                            scan.size()));
  }
  constexpr std::size_t n = BEVImage::cells();
  BEVImage bev;
  bev.with_normals = normals != nullptr;
  bev.point_count.assign(n, 0);
  bev.mean_reflectivity.assign(n, 0.0);
  bev.mean_elevation.assign(n, 0.0);
  bev.std_elevation.assign(n, 0.0);
  bev.min_elevation.assign(n, std::numeric_limits<double>::infinity());
  bev.max_elevation.assign(n, -std::numeric_limits<double>::infinity());
  bev.normal.assign(n, Eigen::Vector3d::Zero());

  // Welford accumulation: mean_elevation holds the running mean, std_elevation M2.
  std::vector<double> refl_sum(n, 0.0);
  std::vector<std::uint32_t> normal_count(n, 0);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Point& p = scan.points[i];
    const auto cell = bev_cell(p.x, p.y);
    if (!cell) {
      continue;
    }
    const std::size_t k = BEVImage::index(cell->row, cell->col);
    const double z = p.z;
    const auto count = ++bev.point_count[k];
    const double delta = z - bev.mean_elevation[k];
    bev.mean_elevation[k] += delta / count;
    bev.std_elevation[k] += delta * (z - bev.mean_elevation[k]);
    bev.min_elevation[k] = std::min(bev.min_elevation[k], z);
    bev.max_elevation[k] = std::max(bev.max_elevation[k], z);
    refl_sum[k] += p.reflectivity;
    if (normals != nullptr && normals->valid[i] != 0) {
      bev.normal[k] += normals->normal[i];
      ++normal_count[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto count = bev.point_count[k];
    if (count == 0) {
      bev.min_elevation[k] = 0.0;
      bev.max_elevation[k] = 0.0;
      continue;
    }
    bev.mean_reflectivity[k] = refl_sum[k] / count;
    bev.std_elevation[k] = std::sqrt(std::max(0.0, bev.std_elevation[k] / count));
    // Keep the mean inside [min, max] against rounding.
    bev.mean_elevation[k] = std::clamp(bev.mean_elevation[k], bev.min_elevation[k], bev.max_elevation[k]);
    if (normal_count[k] > 0) {
      bev.normal[k] /= static_cast<double>(normal_count[k]);
    }
  }
  return bev;
}

Tensor to_tensor(const BEVImage& bev) {
  const std::size_t ch = bev.channels();
  Tensor t(BevGrid::kRows, BevGrid::kCols, ch, bev.with_normals ? "bev_classical_normals" : "bev_classical");
  auto out = t.data();
  for (std::size_t k = 0; k < BEVImage::cells(); ++k) {
    float* v = out.data() + k * ch;
    v[0] = static_cast<float>(bev.point_count[k]);
    v[1] = static_cast<float>(bev.mean_reflectivity[k]);
    v[2] = static_cast<float>(bev.mean_elevation[k]);
    v[3] = static_cast<float>(bev.std_elevation[k]);
    v[4] = static_cast<float>(bev.min_elevation[k]);
    v[5] = static_cast<float>(bev.max_elevation[k]);
    if (bev.with_normals) {
      v[6] = static_cast<float>(bev.normal[k].x());
      v[7] = static_cast<float>(bev.normal[k].y());
      v[8] = static_cast<float>(bev.normal[k].z());
    }
  }
  return t;
}

BEVMask load_bev_gt(const std::filesystem::path& path) {
  const Image8 img = read_png_gray(path);
  if (img.height != BevGrid::kRows || img.width != BevGrid::kCols) {
    throw Error(fmt::format("{}: ground truth is {}x{}, expected {}x{}", path.string(), img.height,
                            img.width, BevGrid::kRows, BevGrid::kCols));
  }
  BEVMask mask;
  mask.road.resize(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), mask.road.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v > 127 ? 1 : 0); });
  return mask;
}

Tensor to_mask_tensor(const BEVMask& mask, const std::vector<std::uint8_t>* valid) {
  if (mask.road.size() != BEVImage::cells() || (valid != nullptr && valid->size() != mask.road.size())) {
    throw Error("to_mask_tensor: BEV mask has the wrong number of cells");
  }
  Tensor t(BevGrid::kRows, BevGrid::kCols, 2, "bev_gt");
  auto out = t.data();
  for (std::size_t k = 0; k < mask.road.size(); ++k) {
    out[k * 2 + 0] = mask.road[k] != 0 ? 1.0F : 0.0F;
    out[k * 2 + 1] = (valid == nullptr || (*valid)[k] != 0) ? 1.0F : 0.0F;
  }
  return t;
}

}  // namespace lidarseg
