#include <algorithm>
#include <array>
#include <fmt/core.h>

#include <openssl/evp.h>

#include "lidarseg/error.hpp"
#include "lidarseg/pipeline.hpp"

namespace lidarseg {

std::string_view to_string(DatasetKind k) {
  return k == DatasetKind::kKittiRoad ? "kitti-road" : "semantic-kitti";
}

std::string_view to_string(View v) { return v == View::kBev ? "bev" : "sv"; }

std::string_view to_string(FeatureSet f) {
  return f == FeatureSet::kClassical ? "classical" : "classical+normals";
}

DatasetKind parse_dataset_kind(std::string_view s) {
  if (s == "kitti-road") {
    return DatasetKind::kKittiRoad;
  }
  if (s == "semantic-kitti") {
    return DatasetKind::kSemanticKitti;
  }
  throw Error(fmt::format("unknown dataset kind '{}' (kitti-road | semantic-kitti)", s));
}

View parse_view(std::string_view s) {
  if (s == "bev") {
    return View::kBev;
  }
  if (s == "sv") {
    return View::kSv;
  }
  throw Error(fmt::format("unknown view '{}' (bev | sv)", s));
}

FeatureSet parse_feature_set(std::string_view s) {
  if (s == "classical") {
    return FeatureSet::kClassical;
  }
  if (s == "classical+normals" || s == "normals") {
    return FeatureSet::kClassicalNormals;
  }
  throw Error(fmt::format("unknown feature set '{}' (classical | classical+normals)", s));
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "micro") {
    return Aggregation::kMicro;
  }
  if (s == "macro") {
    return Aggregation::kMacro;
  }
  throw Error(fmt::format("unknown aggregation '{}' (micro | macro)", s));
}

int PipelineConfig::effective_stride() const noexcept {
  if (stride > 0) {
    return stride;
  }
  return dataset == DatasetKind::kSemanticKitti ? 10 : 1;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.resolution != 64 && cfg.resolution != 32 && cfg.resolution != 16) {
    throw Error(fmt::format("resolution must be 64, 32 or 16, got {}", cfg.resolution));
  }
  if (cfg.stride < 0) {
    throw Error(fmt::format("stride must be >= 1, got {}", cfg.stride));
  }
  const int keep_every = 64 / cfg.resolution;
  if (cfg.layer_offset < 0 || cfg.layer_offset >= keep_every) {
    throw Error(fmt::format("layer_offset must lie in [0, {}) at resolution {}, got {}", keep_every,
                            cfg.resolution, cfg.layer_offset));
  }
  if (cfg.workers < 1) {
    throw Error(fmt::format("workers must be >= 1, got {}", cfg.workers));
  }
  static constexpr std::array kSplits = {"train", "val", "test", "all"};
  if (std::find(kSplits.begin(), kSplits.end(), cfg.split) == kSplits.end()) {
    throw Error(fmt::format("split must be train, val, test or all, got '{}'", cfg.split));
  }
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
    throw Error(fmt::format("threshold must lie in [0, 1], got {}", cfg.threshold));
  }
}

std::string sha256_hex(std::span<const std::byte> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", digest[i]);
  }
  return hex;
}

}  // namespace lidarseg
