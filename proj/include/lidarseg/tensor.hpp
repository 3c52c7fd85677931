#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lidarseg {

/// Row-major H x W x C float32 raster with a short channel-set name.
///
/// On-disk layout ("LTNS" container, all integers little-endian):
///
///   offset  size  field
///   0       4     magic "LTNS"
///   4       2     version (1)
///   6       2     dtype code (0 = f32)
///   8       12    height, width, channels (u32 each)
///   20      32    channel-set name, zero padded
///   52      4*N   values, height-major then width then channel
class Tensor {
 public:
  static constexpr std::size_t kHeaderBytes = 52;
  static constexpr std::size_t kNameBytes = 32;
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint16_t kDtypeF32 = 0;

  Tensor() = default;
  Tensor(std::size_t height, std::size_t width, std::size_t channels, std::string name);
  Tensor(std::size_t height, std::size_t width, std::size_t channels, std::string name,
         std::vector<float> data);

  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::span<const float> data() const noexcept { return data_; }
  [[nodiscard]] std::span<float> data() noexcept { return data_; }

  [[nodiscard]] std::size_t index(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return (row * width_ + col) * channels_ + ch;
  }
  [[nodiscard]] float at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[index(row, col, ch)];
  }
  float& at(std::size_t row, std::size_t col, std::size_t ch) { return data_[index(row, col, ch)]; }

  /// Bitwise comparison: -0.0 and 0.0 differ.
  friend bool operator==(const Tensor& a, const Tensor& b) noexcept;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::string name_;
  std::vector<float> data_;
};

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace lidarseg
