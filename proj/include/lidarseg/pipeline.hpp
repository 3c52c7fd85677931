#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <optional>

#include <json.hpp>

#include "lidarseg/seg_metrics.hpp"
#include "lidarseg/tensor.hpp"

namespace lidarseg {

enum class DatasetKind { kKittiRoad, kSemanticKitti };
enum class View { kBev, kSv };
enum class FeatureSet { kClassical, kClassicalNormals };

std::string_view to_string(DatasetKind k);
std::string_view to_string(View v);
std::string_view to_string(FeatureSet f);
DatasetKind parse_dataset_kind(std::string_view s);
View parse_view(std::string_view s);
FeatureSet parse_feature_set(std::string_view s);
Aggregation parse_aggregation(std::string_view s);

/// Default dataset root is read from this environment variable by the CLI.
inline constexpr const char* kDatasetRootEnv = "LIDARSEG_DATASET_ROOT";

struct PipelineConfig {
  std::filesystem::path dataset_root;
  DatasetKind dataset = DatasetKind::kSemanticKitti;
  View view = View::kSv;
  int resolution = 64;
  FeatureSet features = FeatureSet::kClassical;
  std::uint32_t road_class = 40;
  std::filesystem::path output = "lidarseg_out";
  /// train | val | test | all
  std::string split = "test";
  /// Semantic-KITTI sequences; overrides the split's default list when set.
  std::vector<std::string> sequences;
  /// Keep one frame in `stride`; 0 selects the dataset default (10 or 1).
  int stride = 0;
  /// Seed of the KITTI-road train/val/test shuffle.
  std::uint64_t seed = 2020;
  int workers = 1;
  /// Subsampling keeps layers with index % keep_every == layer_offset.
  int layer_offset = 0;
  /// KITTI-road BEV ground-truth directory, relative to the dataset root.
  std::filesystem::path bev_gt_dir = "training/gt_bev";
  double threshold = 0.5;
  Aggregation aggregation = Aggregation::kMicro;
  std::size_t pr_points = 1000;
  bool pr_png = false;

  [[nodiscard]] int effective_stride() const noexcept;
};

/// Throws on any out-of-range field.
void validate(const PipelineConfig& cfg);

struct FrameRef {
  std::string id;
  std::filesystem::path scan;
  std::filesystem::path labels;
  std::filesystem::path bev_gt;
};

struct FrameSelection {
  std::vector<FrameRef> frames;
  /// How the frames were chosen, recorded in the manifest.
  nlohmann::json split;
};

/// Semantic-KITTI: sequences/<seq>/velodyne/*.bin with labels/*.label;
/// train = 01-07, 09, 10 and test = 08. KITTI-road: training/velodyne/*.bin
/// shuffled with the seed into 229/30/30 proportions. Frames are sorted by id.
FrameSelection select_frames(const PipelineConfig& cfg);

/// The KITTI-road assignment of sorted frame ids to train/val/test.
struct RoadSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};
RoadSplit split_road_frames(std::vector<std::string> sorted_ids, std::uint64_t seed);

struct FrameError {
  std::string id;
  std::string message;
};

struct CommandResult {
  std::size_t frames_ok = 0;
  std::vector<FrameError> errors;
  /// Human-readable summary, printed by the CLI.
  std::string summary;

  [[nodiscard]] int exit_code() const noexcept { return errors.empty() ? 0 : 1; }
};

/// Feature and ground-truth tensors of one frame.
///
/// SV ground truth always comes from the full 64-layer scan so predictions are
/// scored at 64 x 2048 whatever the input resolution.
struct FrameTensors {
  Tensor features;
  Tensor gt;
  std::optional<Tensor> angles;
  nlohmann::json stats;
};

FrameTensors featurize_frame(const PipelineConfig& cfg, const FrameRef& frame);

std::string sha256_hex(std::span<const std::byte> bytes);

inline constexpr const char* kManifestName = "manifest.json";

/// Writes features/, gt/ (and angles/ for SV) tensors plus manifest.json into
/// cfg.output. Frames that fail are reported and skipped.
CommandResult cmd_featurize(const PipelineConfig& cfg);

/// Scores <predictions>/<frame id>.ltns against the manifest ground truth and
/// writes eval/<id>.txt, eval/summary.txt and eval/summary.json.
CommandResult cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& predictions);

/// Renders the featurized tensors of one frame into viz/<id>/*.png.
CommandResult cmd_visualize(const PipelineConfig& cfg, const std::string& frame_id);

/// Layer recovery and projection statistics at 64/32/16 layers per frame.
CommandResult cmd_subsample_stats(const PipelineConfig& cfg);

nlohmann::json read_manifest(const std::filesystem::path& output_dir);

}  // namespace lidarseg
