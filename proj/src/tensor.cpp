#include "lidarseg/tensor.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <fmt/core.h>

#include "byte_io.hpp"
#include "lidarseg/error.hpp"
#include "lidarseg/point_cloud.hpp"

namespace lidarseg {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'N', 'S'};

std::size_t checked_volume(std::uint64_t h, std::uint64_t w, std::uint64_t c) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::size_t>::max() / sizeof(float);
  if (w != 0 && h > kMax / w) {
    throw Error("tensor dimensions overflow");
  }
  const std::uint64_t hw = h * w;
  if (c != 0 && hw > kMax / c) {
    throw Error("tensor dimensions overflow");
  }
  return static_cast<std::size_t>(hw * c);
}

}  // namespace

Tensor::Tensor(std::size_t height, std::size_t width, std::size_t channels, std::string name)
    : Tensor(height, width, channels, std::move(name),
             std::vector<float>(checked_volume(height, width, channels), 0.0F)) {}

Tensor::Tensor(std::size_t height, std::size_t width, std::size_t channels, std::string name,
               std::vector<float> data)
    : height_(height), width_(width), channels_(channels), name_(std::move(name)),
      data_(std::move(data)) {
  if (data_.size() != checked_volume(height, width, channels)) {
    throw Error(fmt::format("tensor data holds {} values, dims {}x{}x{} need {}", data_.size(),
                            height, width, channels, height * width * channels));
  }
  if (name_.size() > kNameBytes) {
    throw Error(fmt::format("tensor name '{}' exceeds {} bytes", name_, kNameBytes));
  }
}

bool operator==(const Tensor& a, const Tensor& b) noexcept {
  return a.height_ == b.height_ && a.width_ == b.width_ && a.channels_ == b.channels_ &&
         a.name_ == b.name_ && a.data_.size() == b.data_.size() &&
         (a.data_.empty() ||
          std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0);
}

std::vector<std::byte> encode_tensor(const Tensor& t) {
  constexpr auto kU32Max = std::numeric_limits<std::uint32_t>::max();
  if (t.height() > kU32Max || t.width() > kU32Max || t.channels() > kU32Max) {
    throw Error("tensor dimension does not fit the u32 header field");
  }
  std::vector<std::byte> out;
  out.reserve(Tensor::kHeaderBytes + t.size() * sizeof(float));
  for (char c : kMagic) {
    out.push_back(static_cast<std::byte>(c));
  }
  detail::store_u16le(out, Tensor::kVersion);
  detail::store_u16le(out, Tensor::kDtypeF32);
  detail::store_u32le(out, static_cast<std::uint32_t>(t.height()));
  detail::store_u32le(out, static_cast<std::uint32_t>(t.width()));
  detail::store_u32le(out, static_cast<std::uint32_t>(t.channels()));
  for (std::size_t i = 0; i < Tensor::kNameBytes; ++i) {
    out.push_back(i < t.name().size() ? static_cast<std::byte>(t.name()[i]) : std::byte{0});
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const float v = t.data()[i];
    if (!std::isfinite(v)) {
      throw Error(fmt::format("tensor '{}' holds a non-finite value at flat index {}", t.name(), i));
    }
    detail::store_f32le(out, v);
  }
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < Tensor::kHeaderBytes) {
    throw Error(fmt::format("tensor stream of {} bytes is shorter than the header", bytes.size()));
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("bad tensor magic");
  }
  const auto version = detail::load_u16le(bytes, 4);
  if (version != Tensor::kVersion) {
    throw Error(fmt::format("unsupported tensor version {}", version));
  }
  const auto dtype = detail::load_u16le(bytes, 6);
  if (dtype != Tensor::kDtypeF32) {
    throw Error(fmt::format("unsupported tensor dtype code {}", dtype));
  }
  const std::uint32_t h = detail::load_u32le(bytes, 8);
  const std::uint32_t w = detail::load_u32le(bytes, 12);
  const std::uint32_t c = detail::load_u32le(bytes, 16);
  const std::size_t n = checked_volume(h, w, c);
  if (bytes.size() - Tensor::kHeaderBytes != n * sizeof(float)) {
    throw Error(fmt::format("tensor payload is {} bytes, dims {}x{}x{} need {}",
                            bytes.size() - Tensor::kHeaderBytes, h, w, c, n * sizeof(float)));
  }
  std::string name;
  for (std::size_t i = 0; i < Tensor::kNameBytes; ++i) {
    const auto ch = static_cast<char>(bytes[20 + i]);
    if (ch == '\0') {
      break;
    }
    name.push_back(ch);
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = detail::load_f32le(bytes, Tensor::kHeaderBytes + i * sizeof(float));
  }
  return Tensor(h, w, c, std::move(name), std::move(data));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  write_file_bytes(encode_tensor(t), path);
}

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace lidarseg
