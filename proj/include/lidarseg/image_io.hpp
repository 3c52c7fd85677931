#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace lidarseg {

/// 8-bit raster, `channels` interleaved values per pixel (1 = gray, 3 = RGB).
struct Image8 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  std::uint8_t* at(std::size_t row, std::size_t col) {
    return pixels.data() + (row * width + col) * channels;
  }
  [[nodiscard]] const std::uint8_t* at(std::size_t row, std::size_t col) const {
    return pixels.data() + (row * width + col) * channels;
  }
};

/// Reads a PNG as 8-bit gray or RGB, whichever it stores. Alpha is dropped.
Image8 read_png(const std::filesystem::path& path);

/// Reads a PNG as 8-bit gray. Colour images are reduced to luminance, alpha is
/// dropped and 16-bit samples are truncated.
Image8 read_png_gray(const std::filesystem::path& path);

void write_png(const Image8& image, const std::filesystem::path& path);

}  // namespace lidarseg
