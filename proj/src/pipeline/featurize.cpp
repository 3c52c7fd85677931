#include <atomic>
#include <functional>
#include <thread>

#include <fmt/core.h>

#include "lidarseg/bev_project.hpp"
#include "lidarseg/error.hpp"
#include "lidarseg/layering.hpp"
#include "lidarseg/normal_est.hpp"
#include "lidarseg/pipeline.hpp"
#include "lidarseg/sv_project.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace lidarseg {

namespace {

constexpr std::uint32_t kNotRoad = 0xFFFFFFFFU;

Tensor sv_features(const SVImage& sv, FeatureSet features) {
  Tensor classical = to_feature_tensor(sv);
  if (features == FeatureSet::kClassical) {
    return classical;
  }
  const NormalMap nm = estimate_normals(sv);
  Tensor t(sv.height, sv.width, 7, "sv_classical_normals");
  for (std::size_t cell = 0; cell < sv.cells(); ++cell) {
    float* out = t.data().data() + cell * 7;
    for (std::size_t c = 0; c < 4; ++c) {
      out[c] = classical.data()[cell * 4 + c];
    }
    if (nm.valid[cell] != 0) {
      out[4] = static_cast<float>(nm.normal[cell].x());
      out[5] = static_cast<float>(nm.normal[cell].y());
      out[6] = static_cast<float>(nm.normal[cell].z());
    }
  }
  return t;
}

// KITTI-road SV ground truth: a point is road when its BEV cell is road; only
// points inside the annotated grid make a pixel valid.
SVMask road_sv_mask(const LayeredScan& ls64, const BEVMask& bev_gt, std::uint32_t road_class) {
  PointLabels labels;
  labels.class_id.resize(ls64.size());
  std::vector<std::uint8_t> in_grid(ls64.size(), 0);
  for (std::size_t i = 0; i < ls64.size(); ++i) {
    const Point& p = ls64.scan.points[i];
    const auto cell = bev_cell(p.x, p.y);
    labels.class_id[i] = kNotRoad;
    if (cell) {
      in_grid[i] = 1;
      if (bev_gt.road[BEVImage::index(cell->row, cell->col)] != 0) {
        labels.class_id[i] = road_class;
      }
    }
  }
  SVMask mask = project_sv_labels(ls64, labels, road_class);
  std::fill(mask.valid.begin(), mask.valid.end(), std::uint8_t{0});
  for (std::size_t i = 0; i < ls64.size(); ++i) {
    if (in_grid[i] != 0) {
      const Point& p = ls64.scan.points[i];
      mask.valid[ls64.layer_of[i] * mask.width + sv_column(to_spherical(p.x, p.y, p.z).phi)] = 1;
    }
  }
  return mask;
}

// Sparse BEV ground truth from point labels.
Tensor labelled_bev_mask(const LayeredScan& ls64, const PointLabels& labels, std::uint32_t road_class) {
  BEVMask mask;
  mask.road.assign(BEVImage::cells(), 0);
  std::vector<std::uint8_t> valid(BEVImage::cells(), 0);
  for (std::size_t i = 0; i < ls64.size(); ++i) {
    const Point& p = ls64.scan.points[i];
    const auto cell = bev_cell(p.x, p.y);
    if (!cell) {
      continue;
    }
    const std::size_t k = BEVImage::index(cell->row, cell->col);
    valid[k] = 1;
    if (labels.class_id[i] == road_class) {
      mask.road[k] = 1;
    }
  }
  return to_mask_tensor(mask, &valid);
}

}  // namespace

FrameTensors featurize_frame(const PipelineConfig& cfg, const FrameRef& frame) {
  PointCloudScan scan = read_scan(frame.scan);
  const std::size_t clamped = scan.reflectivity_clamped;
  LayeredScan ls64 = assign_layers(std::move(scan));
  if (ls64.n_layers != 64) {
    throw Error(fmt::format("detected {} scanner layers, expected 64", ls64.n_layers));
  }
  const int keep_every = 64 / cfg.resolution;
  const LayeredScan ls = keep_every == 1 ? ls64 : subsample(ls64, keep_every, cfg.layer_offset);

  FrameTensors out;
  out.stats = {{"points", ls64.size()},
               {"points_kept", ls.size()},
               {"layers", ls.n_layers},
               {"reflectivity_clamped", clamped}};

  std::optional<PointLabels> labels;
  std::optional<BEVMask> bev_gt;
  if (cfg.dataset == DatasetKind::kSemanticKitti) {
    labels = read_labels(frame.labels, ls64.size());
  } else {
    bev_gt = load_bev_gt(frame.bev_gt);
  }

  if (cfg.view == View::kSv) {
    const SVImage sv = project_sv(ls);
    out.features = sv_features(sv, cfg.features);
    out.angles = to_angle_tensor(sv);
    const SVMask mask = labels ? project_sv_labels(ls64, *labels, cfg.road_class)
                               : road_sv_mask(ls64, *bev_gt, cfg.road_class);
    out.gt = to_mask_tensor(mask);
  } else {
    if (cfg.features == FeatureSet::kClassicalNormals) {
      const SVImage sv = project_sv(ls);
      const NormalMap nm = estimate_normals(sv);
      const PointNormals pn = normals_to_points(ls, sv, nm);
      out.features = to_tensor(project_bev(ls.scan, &pn));
    } else {
      out.features = to_tensor(project_bev(ls.scan));
    }
    out.gt = labels ? labelled_bev_mask(ls64, *labels, cfg.road_class) : to_mask_tensor(*bev_gt);
  }
  return out;
}

CommandResult cmd_featurize(const PipelineConfig& cfg) {
  validate(cfg);
  const FrameSelection sel = select_frames(cfg);
  if (sel.frames.empty()) {
    throw Error(fmt::format("no frames selected under {} (dataset {}, split {})",
                            cfg.dataset_root.string(), to_string(cfg.dataset), cfg.split));
  }

  const bool sv = cfg.view == View::kSv;
  std::vector<std::string> groups = {"features", "gt"};
  if (sv) {
    groups.emplace_back("angles");
  }
  fs::create_directories(cfg.output);
  for (const auto& g : {"features", "gt", "angles"}) {
    const fs::path dir = cfg.output / g;
    if (fs::is_directory(dir)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".ltns") {
          fs::remove(e.path());
        }
      }
    }
  }
  for (const auto& g : groups) {
    fs::create_directories(cfg.output / g);
  }

  struct Outcome {
    nlohmann::json entry;
    std::optional<std::string> error;
  };
  std::vector<Outcome> outcomes(sel.frames.size());
  detail::parallel_for(sel.frames.size(), static_cast<std::size_t>(cfg.workers), [&](std::size_t i) {
    const FrameRef& frame = sel.frames[i];
    try {
      const FrameTensors t = featurize_frame(cfg, frame);
      nlohmann::json files;
      const auto emit = [&](const std::string& group, const Tensor& tensor) {
        const fs::path rel = fs::path(group) / (frame.id + ".ltns");
        const auto bytes = encode_tensor(tensor);
        write_file_bytes(bytes, cfg.output / rel);
        files[group] = {{"path", rel.generic_string()},
                        {"sha256", sha256_hex(bytes)},
                        {"shape", {tensor.height(), tensor.width(), tensor.channels()}},
                        {"name", tensor.name()}};
      };
      emit("features", t.features);
      emit("gt", t.gt);
      if (t.angles) {
        emit("angles", *t.angles);
      }
      outcomes[i].entry = {{"id", frame.id},
                           {"scan", fs::relative(frame.scan, cfg.dataset_root).generic_string()},
                           {"files", files},
                           {"stats", t.stats}};
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  CommandResult result;
  nlohmann::json manifest;
  manifest["format"] = "lidarseg-manifest";
  manifest["version"] = 1;
  manifest["dataset"] = to_string(cfg.dataset);
  manifest["view"] = to_string(cfg.view);
  manifest["resolution"] = cfg.resolution;
  manifest["features"] = to_string(cfg.features);
  manifest["road_class"] = cfg.road_class;
  manifest["layer_offset"] = cfg.layer_offset;
  manifest["split"] = sel.split;
  manifest["frames"] = nlohmann::json::array();
  manifest["errors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error) {
      result.errors.push_back({sel.frames[i].id, *outcomes[i].error});
      manifest["errors"].push_back({{"id", sel.frames[i].id}, {"message", *outcomes[i].error}});
    } else {
      manifest["frames"].push_back(outcomes[i].entry);
      ++result.frames_ok;
    }
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file_bytes(std::as_bytes(std::span(text.data(), text.size())), cfg.output / kManifestName);

  result.summary = fmt::format("featurized {} of {} frames ({} {} {} {}) into {}\n", result.frames_ok,
                               sel.frames.size(), to_string(cfg.dataset), to_string(cfg.view),
                               cfg.resolution, to_string(cfg.features), cfg.output.string());
  for (const auto& e : result.errors) {
    result.summary += fmt::format("error frame={} message={}\n", e.id, e.message);
  }
  return result;
}

nlohmann::json read_manifest(const fs::path& output_dir) {
  const fs::path path = output_dir / kManifestName;
  const auto bytes = read_file_bytes(path);
  try {
    return nlohmann::json::parse(reinterpret_cast<const char*>(bytes.data()),
                                 reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace lidarseg
