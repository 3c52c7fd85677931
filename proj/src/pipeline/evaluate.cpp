#include <fmt/core.h>

#include "lidarseg/error.hpp"
#include "lidarseg/image_io.hpp"
#include "lidarseg/pipeline.hpp"
#include "lidarseg/point_cloud.hpp"
#include "render.hpp"

namespace fs = std::filesystem;

namespace lidarseg {

namespace {

void write_text(const std::string& text, const fs::path& path) {
  write_file_bytes(std::as_bytes(std::span(text.data(), text.size())), path);
}

BinaryMask channel_mask(const Tensor& t, std::size_t channel) {
  BinaryMask m{t.height(), t.width(), std::vector<std::uint8_t>(t.height() * t.width())};
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    m.values[k] = t.data()[k * t.channels() + channel] > 0.5F ? 1 : 0;
  }
  return m;
}

}  // namespace

CommandResult cmd_eval(const PipelineConfig& cfg, const fs::path& predictions) {
  validate(cfg);
  const nlohmann::json manifest = read_manifest(cfg.output);
  const auto& frames = manifest.at("frames");
  if (frames.empty()) {
    throw Error(fmt::format("{}: manifest lists no frames", cfg.output.string()));
  }
  const fs::path eval_dir = cfg.output / "eval";
  fs::create_directories(eval_dir);

  MetricsAccumulator acc(cfg.threshold, cfg.pr_points);
  CommandResult result;
  nlohmann::json per_frame = nlohmann::json::array();
  for (const auto& f : frames) {
    const std::string id = f.at("id").get<std::string>();
    const Tensor gt = read_tensor(cfg.output / f.at("files").at("gt").at("path").get<std::string>());
    if (gt.channels() != 2) {
      throw Error(fmt::format("frame {}: ground truth has {} channels, expected 2", id, gt.channels()));
    }
    const fs::path pred_path = predictions / (id + ".ltns");
    if (!fs::exists(pred_path)) {
      throw Error(fmt::format("frame {}: missing prediction {}", id, pred_path.string()));
    }
    const Tensor pred = read_tensor(pred_path);
    if (pred.height() != gt.height() || pred.width() != gt.width() || pred.channels() != 1) {
      throw Error(fmt::format("frame {}: prediction is {}x{}x{}, expected {}x{}x1", id, pred.height(),
                              pred.width(), pred.channels(), gt.height(), gt.width()));
    }
    ConfidenceMap conf;
    try {
      conf = ConfidenceMap(pred.height(), pred.width(), {pred.data().begin(), pred.data().end()});
    } catch (const std::exception& e) {
      throw Error(fmt::format("frame {}: {}", id, e.what()));
    }
    const BinaryMask road = channel_mask(gt, 0);
    const BinaryMask valid = channel_mask(gt, 1);
    const MetricsReport r = acc.add(id, collect_samples(conf, road, &valid));
    write_text(format_report(r), eval_dir / (id + ".txt"));
    nlohmann::json j = to_json(r);
    j.erase("pr_curve");
    per_frame.push_back(std::move(j));
    ++result.frames_ok;
  }

  const MetricsReport micro = acc.aggregate(Aggregation::kMicro);
  const MetricsReport macro = acc.aggregate(Aggregation::kMacro);
  const MetricsReport& selected = cfg.aggregation == Aggregation::kMicro ? micro : macro;

  write_text(format_report(selected), eval_dir / "summary.txt");
  nlohmann::json summary = {{"aggregation", selected.aggregation},
                            {"selected", to_json(selected)},
                            {"micro", to_json(micro)},
                            {"macro", to_json(macro)},
                            {"frames", per_frame}};
  write_text(summary.dump(2) + "\n", eval_dir / "summary.json");
  if (cfg.pr_png) {
    write_png(detail::pr_curve_image(selected.pr_curve), eval_dir / "pr_curve.png");
  }

  result.summary = format_report(selected);
  if (micro.ap && macro.ap) {
    result.summary += fmt::format("ap_micro={:.6f}\nap_macro={:.6f}\n", *micro.ap, *macro.ap);
  }
  return result;
}

}  // namespace lidarseg
