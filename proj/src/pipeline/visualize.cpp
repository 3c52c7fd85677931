#include <fmt/core.h>

#include "lidarseg/error.hpp"
#include "lidarseg/image_io.hpp"
#include "lidarseg/pipeline.hpp"
#include "render.hpp"

namespace fs = std::filesystem;

namespace lidarseg {

namespace {

const nlohmann::json& find_frame(const nlohmann::json& manifest, const std::string& id) {
  for (const auto& f : manifest.at("frames")) {
    if (f.at("id").get<std::string>() == id) {
      return f;
    }
  }
  throw Error(fmt::format("frame {} is not in the manifest", id));
}

std::vector<std::uint8_t> nonzero(const Tensor& t, std::size_t channel) {
  std::vector<std::uint8_t> m(t.height() * t.width());
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = t.data()[k * t.channels() + channel] != 0.0F ? 1 : 0;
  }
  return m;
}

}  // namespace

CommandResult cmd_visualize(const PipelineConfig& cfg, const std::string& frame_id) {
  const nlohmann::json manifest = read_manifest(cfg.output);
  const nlohmann::json& frame = find_frame(manifest, frame_id);
  const auto& files = frame.at("files");
  const Tensor feat = read_tensor(cfg.output / files.at("features").at("path").get<std::string>());
  const Tensor gt = read_tensor(cfg.output / files.at("gt").at("path").get<std::string>());
  const bool sv = manifest.at("view").get<std::string>() == "sv";

  const fs::path dir = cfg.output / "viz" / frame_id;
  fs::create_directories(dir);
  std::vector<std::string> written;
  const auto save = [&](const Image8& img, const std::string& name) {
    write_png(img, dir / (name + ".png"));
    written.push_back(name + ".png");
  };

  const std::size_t h = feat.height();
  const std::size_t w = feat.width();
  if (sv) {
    // min_elevation, mean_reflectivity, min_radial, occupancy[, nx, ny, nz]
    const auto occ = nonzero(feat, 3);
    save(detail::channel_image(feat, 0, occ), "min_elevation");
    save(detail::channel_image(feat, 1, occ), "mean_reflectivity");
    save(detail::channel_image(feat, 2, occ), "min_radial");
    save(detail::mask_image(h, w, occ), "occupancy");
    if (feat.channels() == 7) {
      save(detail::normal_image(feat, 4), "normals");
    }
  } else {
    const auto occ = nonzero(feat, 0);
    save(detail::channel_image(feat, 0, occ), "point_count");
    save(detail::channel_image(feat, 1, occ), "mean_reflectivity");
    save(detail::channel_image(feat, 2, occ), "mean_elevation");
    save(detail::channel_image(feat, 3, occ), "std_elevation");
    save(detail::channel_image(feat, 4, occ), "min_elevation");
    save(detail::channel_image(feat, 5, occ), "max_elevation");
    save(detail::mask_image(h, w, occ), "occupancy");
    if (feat.channels() == 9) {
      save(detail::normal_image(feat, 6), "normals");
    }
  }
  save(detail::mask_image(gt.height(), gt.width(), nonzero(gt, 0)), "gt_road");
  save(detail::mask_image(gt.height(), gt.width(), nonzero(gt, 1)), "gt_valid");

  CommandResult result;
  result.frames_ok = 1;
  result.summary = fmt::format("wrote {} images to {}\n", written.size(), dir.string());
  return result;
}

}  // namespace lidarseg
