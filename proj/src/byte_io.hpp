#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lidarseg::detail {

inline std::uint32_t load_u32le(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint16_t load_u16le(std::span<const std::byte> b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[off]) |
                                    (static_cast<std::uint16_t>(b[off + 1]) << 8));
}

inline float load_f32le(std::span<const std::byte> b, std::size_t off) {
  return std::bit_cast<float>(load_u32le(b, off));
}

inline void store_u32le(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFFU));
  }
}

inline void store_u16le(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFFU));
  out.push_back(static_cast<std::byte>((v >> 8) & 0xFFU));
}

inline void store_f32le(std::vector<std::byte>& out, float v) {
  store_u32le(out, std::bit_cast<std::uint32_t>(v));
}

}  // namespace lidarseg::detail
