#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/core.h>

#include "lidarseg/error.hpp"
#include "lidarseg/pipeline.hpp"

namespace fs = std::filesystem;

namespace lidarseg {

namespace {

std::vector<fs::path> list_bins(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) {
    return out;
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".bin") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> default_sequences(const PipelineConfig& cfg) {
  if (cfg.split == "train") {
    return {"01", "02", "03", "04", "05", "06", "07", "09", "10"};
  }
  if (cfg.split == "test") {
    return {"08"};
  }
  if (cfg.split == "all") {
    std::vector<std::string> seqs;
    const fs::path root = cfg.dataset_root / "sequences";
    if (fs::is_directory(root)) {
      for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) {
          seqs.push_back(e.path().filename().string());
        }
      }
    }
    std::sort(seqs.begin(), seqs.end());
    return seqs;
  }
  // Semantic-KITTI has no validation split in this protocol.
  return {};
}

// Uniform index in [0, bound) from raw 64-bit draws, identical on every platform.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = 0;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

}  // namespace

RoadSplit split_road_frames(std::vector<std::string> sorted_ids, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = sorted_ids.size(); i > 1; --i) {
    std::swap(sorted_ids[i - 1], sorted_ids[uniform_index(rng, i)]);
  }
  // 30 of 289 frames each for validation and test.
  const auto n = sorted_ids.size();
  const auto held = static_cast<std::size_t>(std::lround(static_cast<double>(n) * 30.0 / 289.0));
  RoadSplit s;
  s.test.assign(sorted_ids.begin(), sorted_ids.begin() + static_cast<std::ptrdiff_t>(held));
  s.val.assign(sorted_ids.begin() + static_cast<std::ptrdiff_t>(held),
               sorted_ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, 2 * held)));
  s.train.assign(sorted_ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, 2 * held)),
                 sorted_ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

FrameSelection select_frames(const PipelineConfig& cfg) {
  FrameSelection sel;
  const int stride = cfg.effective_stride();
  if (cfg.dataset == DatasetKind::kSemanticKitti) {
    const auto seqs = cfg.sequences.empty() ? default_sequences(cfg) : cfg.sequences;
    for (const auto& seq : seqs) {
      const fs::path seq_dir = cfg.dataset_root / "sequences" / seq;
      const auto bins = list_bins(seq_dir / "velodyne");
      for (std::size_t i = 0; i < bins.size(); i += static_cast<std::size_t>(stride)) {
        const auto stem = bins[i].stem().string();
        sel.frames.push_back({seq + "_" + stem, bins[i], seq_dir / "labels" / (stem + ".label"), {}});
      }
    }
    sel.split = {{"protocol", "semantic-kitti"}, {"split", cfg.split}, {"sequences", seqs},
                 {"stride", stride}};
  } else {
    const auto bins = list_bins(cfg.dataset_root / "training" / "velodyne");
    std::vector<std::string> ids;
    ids.reserve(bins.size());
    for (const auto& b : bins) {
      ids.push_back(b.stem().string());
    }
    const RoadSplit split = split_road_frames(ids, cfg.seed);
    std::vector<std::string> chosen;
    if (cfg.split == "train") {
      chosen = split.train;
    } else if (cfg.split == "val") {
      chosen = split.val;
    } else if (cfg.split == "test") {
      chosen = split.test;
    } else {
      chosen = ids;
    }
    for (std::size_t i = 0; i < chosen.size(); i += static_cast<std::size_t>(stride)) {
      const auto& id = chosen[i];
      sel.frames.push_back({id, cfg.dataset_root / "training" / "velodyne" / (id + ".bin"), {},
                            cfg.dataset_root / cfg.bev_gt_dir / (id + ".png")});
    }
    sel.split = {{"protocol", "kitti-road"}, {"split", cfg.split}, {"seed", cfg.seed},
                 {"stride", stride}, {"train", split.train}, {"val", split.val},
                 {"test", split.test}};
  }
  std::sort(sel.frames.begin(), sel.frames.end(),
            [](const FrameRef& a, const FrameRef& b) { return a.id < b.id; });
  return sel;
}

}  // namespace lidarseg
