#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lidarseg {

struct Point {
  float x = 0.0F;
  float y = 0.0F;
  float z = 0.0F;
  float reflectivity = 0.0F;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Sensor points in acquisition order, exactly as stored on disk.
///
/// Nothing in the library permutes `points`: layer recovery relies on the
/// storage order of the scanner.
struct PointCloudScan {
  std::vector<Point> points;
  /// Number of records whose reflectivity fell outside [0, 1] and was clamped.
  std::size_t reflectivity_clamped = 0;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }
};

/// Per-point semantic class, aligned with the owning scan.
struct PointLabels {
  std::vector<std::uint32_t> class_id;

  [[nodiscard]] std::size_t size() const noexcept { return class_id.size(); }
};

inline constexpr std::size_t kScanRecordBytes = 16;
inline constexpr std::size_t kLabelRecordBytes = 4;

/// Decodes N x (x, y, z, reflectivity) little-endian f32 records.
PointCloudScan decode_scan(std::span<const std::byte> bytes);
std::vector<std::byte> encode_scan(const PointCloudScan& scan);

PointCloudScan read_scan(const std::filesystem::path& path);
void write_scan(const PointCloudScan& scan, const std::filesystem::path& path);

/// Reads a Semantic-KITTI `.label` file. The class is the low 16 bits of each
/// record; the instance id in the high half is dropped.
PointLabels read_labels(const std::filesystem::path& path, std::size_t expected_len);

/// Writes raw 32-bit label records (class in the low half, instance above).
void write_label_records(std::span<const std::uint32_t> records,
                         const std::filesystem::path& path);

/// Whole-file read used by every binary reader.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::byte> bytes, const std::filesystem::path& path);

}  // namespace lidarseg
