#include "lidarseg/point_cloud.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "byte_io.hpp"
#include "lidarseg/error.hpp"

namespace lidarseg {

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fmt::format("cannot open {}", path.string()));
  }
  in.seekg(0, std::ios::end);
  const auto len = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(len);
  if (len > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(len))) {
    throw Error(fmt::format("short read on {}", path.string()));
  }
  return bytes;
}

void write_file_bytes(std::span<const std::byte> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(fmt::format("cannot create {}", path.string()));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(fmt::format("write failed on {}", path.string()));
  }
}

PointCloudScan decode_scan(std::span<const std::byte> bytes) {
  if (bytes.size() % kScanRecordBytes != 0) {
    throw Error(fmt::format("scan byte length {} is not a multiple of {} ({} trailing bytes)",
                            bytes.size(), kScanRecordBytes, bytes.size() % kScanRecordBytes));
  }
  const std::size_t n = bytes.size() / kScanRecordBytes;
  PointCloudScan scan;
  scan.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t off = i * kScanRecordBytes;
    Point p{detail::load_f32le(bytes, off), detail::load_f32le(bytes, off + 4),
            detail::load_f32le(bytes, off + 8), detail::load_f32le(bytes, off + 12)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.reflectivity)) {
      throw Error(fmt::format("non-finite value in scan record {}", i));
    }
    if (p.reflectivity < 0.0F || p.reflectivity > 1.0F) {
      p.reflectivity = p.reflectivity < 0.0F ? 0.0F : 1.0F;
      ++scan.reflectivity_clamped;
    }
    scan.points.push_back(p);
  }
  return scan;
}

std::vector<std::byte> encode_scan(const PointCloudScan& scan) {
  std::vector<std::byte> out;
  out.reserve(scan.size() * kScanRecordBytes);
  for (const Point& p : scan.points) {
    detail::store_f32le(out, p.x);
    detail::store_f32le(out, p.y);
    detail::store_f32le(out, p.z);
    detail::store_f32le(out, p.reflectivity);
  }
  return out;
}

PointCloudScan read_scan(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(fmt::format("scan file {} does not exist", path.string()));
  }
  try {
    return decode_scan(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_scan(const PointCloudScan& scan, const std::filesystem::path& path) {
  write_file_bytes(encode_scan(scan), path);
}

PointLabels read_labels(const std::filesystem::path& path, std::size_t expected_len) {
  if (!std::filesystem::exists(path)) {
    throw Error(fmt::format("label file {} does not exist", path.string()));
  }
  const auto bytes = read_file_bytes(path);
  if (bytes.size() % kLabelRecordBytes != 0) {
    throw Error(fmt::format("{}: byte length {} is not a multiple of {}", path.string(), bytes.size(),
                            kLabelRecordBytes));
  }
  const std::size_t n = bytes.size() / kLabelRecordBytes;
  if (n != expected_len) {
    throw Error(fmt::format("{}: {} labels for a scan of {} points", path.string(), n, expected_len));
  }
  PointLabels labels;
  labels.class_id.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.class_id[i] = detail::load_u32le(bytes, i * kLabelRecordBytes) & 0xFFFFU;
  }
  return labels;
}

void write_label_records(std::span<const std::uint32_t> records, const std::filesystem::path& path) {
  std::vector<std::byte> out;
  out.reserve(records.size() * kLabelRecordBytes);
  for (std::uint32_t r : records) {
    detail::store_u32le(out, r);
  }
  write_file_bytes(out, path);
}

}  // namespace lidarseg
