#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace lidarseg::detail {

Image8 channel_image(const Tensor& t, std::size_t channel, const std::vector<std::uint8_t>& mask) {
  Image8 img(t.height(), t.width(), 1);
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  const std::size_t cells = t.height() * t.width();
  for (std::size_t k = 0; k < cells; ++k) {
    if (mask[k] != 0) {
      lo = std::min(lo, t.data()[k * t.channels() + channel]);
      hi = std::max(hi, t.data()[k * t.channels() + channel]);
    }
  }
  const float span = hi > lo ? hi - lo : 1.0F;
  for (std::size_t k = 0; k < cells; ++k) {
    if (mask[k] == 0) {
      continue;
    }
    const float v = (t.data()[k * t.channels() + channel] - lo) / span;
    // Occupied cells start at 1 so they never read as empty.
    img.pixels[k] = static_cast<std::uint8_t>(1 + std::lround(std::clamp(v, 0.0F, 1.0F) * 254.0F));
  }
  return img;
}

Image8 mask_image(std::size_t h, std::size_t w, const std::vector<std::uint8_t>& mask) {
  Image8 img(h, w, 1);
  for (std::size_t k = 0; k < h * w; ++k) {
    img.pixels[k] = mask[k] != 0 ? 255 : 0;
  }
  return img;
}

Image8 normal_image(const Tensor& t, std::size_t first_channel) {
  Image8 img(t.height(), t.width(), 3);
  for (std::size_t k = 0; k < t.height() * t.width(); ++k) {
    const float* n = t.data().data() + k * t.channels() + first_channel;
    if (n[0] == 0.0F && n[1] == 0.0F && n[2] == 0.0F) {
      continue;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = (std::clamp<double>(n[c], -1.0, 1.0) + 1.0) * 127.5;
      img.pixels[k * 3 + c] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return img;
}

namespace {

void plot(Image8& img, long row, long col, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (row < 0 || col < 0 || row >= static_cast<long>(img.height) || col >= static_cast<long>(img.width)) {
    return;
  }
  auto* px = img.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
  px[0] = r;
  px[1] = g;
  px[2] = b;
}

void line(Image8& img, long r0, long c0, long r1, long c1) {
  const long dr = std::abs(r1 - r0);
  const long dc = std::abs(c1 - c0);
  const long sr = r0 < r1 ? 1 : -1;
  const long sc = c0 < c1 ? 1 : -1;
  long err = dc - dr;
  for (;;) {
    plot(img, r0, c0, 200, 30, 30);
    if (r0 == r1 && c0 == c1) {
      return;
    }
    const long e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c0 += sc;
    }
    if (e2 < dc) {
      err += dc;
      r0 += sr;
    }
  }
}

}  // namespace

Image8 pr_curve_image(const std::vector<PRPoint>& curve, std::size_t size) {
  Image8 img(size, size, 3, 255);
  const long margin = static_cast<long>(size / 16);
  const long extent = static_cast<long>(size) - 2 * margin;
  const auto to_px = [&](double recall, double precision) {
    return std::pair<long, long>{margin + std::lround((1.0 - precision) * static_cast<double>(extent)),
                                 margin + std::lround(recall * static_cast<double>(extent))};
  };
  for (long i = 0; i <= extent; ++i) {
    plot(img, margin + extent, margin + i, 0, 0, 0);
    plot(img, margin + i, margin, 0, 0, 0);
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto [r0, c0] = to_px(curve[i - 1].recall, curve[i - 1].precision);
    const auto [r1, c1] = to_px(curve[i].recall, curve[i].precision);
    line(img, r0, c0, r1, c1);
  }
  return img;
}

}  // namespace lidarseg::detail
