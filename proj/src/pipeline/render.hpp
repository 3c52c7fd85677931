#pragma once

#include <cstddef>
#include <vector>

#include "lidarseg/image_io.hpp"
#include "lidarseg/seg_metrics.hpp"
#include "lidarseg/tensor.hpp"

namespace lidarseg::detail {

/// One channel stretched to [0, 255] over the cells where mask != 0; the rest is black.
Image8 channel_image(const Tensor& t, std::size_t channel, const std::vector<std::uint8_t>& mask);

/// White where mask != 0, black elsewhere.
Image8 mask_image(std::size_t h, std::size_t w, const std::vector<std::uint8_t>& mask);

/// Normal components mapped from [-1, 1] to [0, 255] as (x, y, z) -> (R, G, B).
/// Cells whose three components are all zero carry no normal and stay black.
Image8 normal_image(const Tensor& t, std::size_t first_channel);

/// Precision (vertical) against recall (horizontal) on a white canvas.
Image8 pr_curve_image(const std::vector<PRPoint>& curve, std::size_t size = 512);

}  // namespace lidarseg::detail
