#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "lidarseg/error.hpp"
#include "lidarseg/layering.hpp"
#include "lidarseg/pipeline.hpp"
#include "lidarseg/sv_project.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace lidarseg {

namespace {

// Vertical field of view assumed by the evenly discretised projection.
constexpr double kFovUpDeg = 2.0;
constexpr double kFovDownDeg = -24.9;

nlohmann::json stats_json(const ProjectionStats& s) {
  return {{"rows", s.height},          {"points", s.points},       {"dropped", s.dropped},
          {"occupied_cells", s.occupied_cells}, {"empty_cells", s.empty_cells},
          {"collisions", s.collisions}, {"empty_rows", s.empty_rows}};
}

nlohmann::json frame_stats(const PipelineConfig& cfg, const FrameRef& frame) {
  PointCloudScan scan = read_scan(frame.scan);
  const auto t0 = std::chrono::steady_clock::now();
  const LayeredScan ls = assign_layers(std::move(scan));
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json j = {{"id", frame.id}, {"points", ls.size()}, {"layers", ls.n_layers}, {"layering_ms", ms}};
  if (ls.n_layers != 64) {
    throw Error(fmt::format("detected {} scanner layers, expected 64", ls.n_layers));
  }
  const double up = kFovUpDeg * std::numbers::pi / 180.0;
  const double down = kFovDownDeg * std::numbers::pi / 180.0;
  for (const int res : {64, 32, 16}) {
    const int k = 64 / res;
    const LayeredScan sub = k == 1 ? ls : subsample(ls, k, cfg.layer_offset % k);
    const SVImage sv = project_sv(sub);
    const std::string key = std::to_string(res);
    j["resolutions"][key] = {{"points", sub.size()},
                             {"layer_indexed", stats_json(projection_stats(sv, sub.size()))},
                             {"uniform", stats_json(uniform_projection_stats(sub.scan, sub.n_layers, up, down))}};
  }
  return j;
}

}  // namespace

CommandResult cmd_subsample_stats(const PipelineConfig& cfg) {
  validate(cfg);
  const FrameSelection sel = select_frames(cfg);
  if (sel.frames.empty()) {
    throw Error(fmt::format("no frames selected under {}", cfg.dataset_root.string()));
  }
  struct Outcome {
    nlohmann::json stats;
    std::optional<std::string> error;
  };
  std::vector<Outcome> outcomes(sel.frames.size());
  detail::parallel_for(sel.frames.size(), static_cast<std::size_t>(cfg.workers), [&](std::size_t i) {
    try {
      outcomes[i].stats = frame_stats(cfg, sel.frames[i]);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  CommandResult result;
  nlohmann::json all = nlohmann::json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::string& id = sel.frames[i].id;
    if (outcomes[i].error) {
      result.errors.push_back({id, *outcomes[i].error});
      result.summary += fmt::format("error frame={} message={}\n", id, *outcomes[i].error);
      continue;
    }
    const auto& s = outcomes[i].stats;
    const auto& r = s.at("resolutions");
    result.summary += fmt::format("frame={} layers={} points64={} points32={} points16={}", id,
                                  s.at("layers").get<int>(), r.at("64").at("points").get<std::size_t>(),
                                  r.at("32").at("points").get<std::size_t>(),
                                  r.at("16").at("points").get<std::size_t>());
    for (const char* res : {"64", "32", "16"}) {
      const auto& li = r.at(res).at("layer_indexed");
      const auto& un = r.at(res).at("uniform");
      result.summary += fmt::format(" empty_rows{}={}/{} collisions{}={}/{}", res,
                                    li.at("empty_rows").get<std::size_t>(), un.at("empty_rows").get<std::size_t>(),
                                    res, li.at("collisions").get<std::size_t>(),
                                    un.at("collisions").get<std::size_t>());
    }
    result.summary += "\n";
    all.push_back(s);
    ++result.frames_ok;
  }
  fs::create_directories(cfg.output);
  const std::string text = nlohmann::json{{"frames", all}}.dump(2) + "\n";
  write_file_bytes(std::as_bytes(std::span(text.data(), text.size())), cfg.output / "subsample_stats.json");
  return result;
}

}  // namespace lidarseg
