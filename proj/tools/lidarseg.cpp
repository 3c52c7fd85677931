// Command-line front end: featurize, eval, visualize, subsample-stats.
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lidarseg/pipeline.hpp"

namespace {

struct Args {
  std::string dataset = "semantic-kitti";
  std::string view = "sv";
  std::string features = "classical";
  std::string aggregation = "micro";
  std::string predictions;
  std::string frame;
};

}  // namespace

int main(int argc, char** argv) {
  lidarseg::PipelineConfig cfg;
  Args a;

  CLI::App app{"LIDAR road segmentation preprocessing and evaluation"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);

  app.add_option("--dataset_root", cfg.dataset_root, "Dataset directory")->envname(lidarseg::kDatasetRootEnv);
  app.add_option("--dataset", a.dataset, "kitti-road | semantic-kitti")
      ->check(CLI::IsMember({"kitti-road", "semantic-kitti"}));
  app.add_option("--view", a.view, "bev | sv")->check(CLI::IsMember({"bev", "sv"}));
  app.add_option("--resolution", cfg.resolution, "64 | 32 | 16")->check(CLI::IsMember({64, 32, 16}));
  app.add_option("--features", a.features, "classical | classical+normals")
      ->check(CLI::IsMember({"classical", "classical+normals"}));
  app.add_option("--road_class", cfg.road_class, "Road label id");
  app.add_option("--output", cfg.output, "Output directory");
  app.add_option("--split", cfg.split, "train | val | test | all");
  app.add_option("--sequences", cfg.sequences, "Semantic-KITTI sequences, comma separated")->delimiter(',');
  app.add_option("--stride", cfg.stride, "Keep one frame in N, 0 = dataset default");
  app.add_option("--seed", cfg.seed, "KITTI-road split seed");
  app.add_option("--workers", cfg.workers, "Frame-parallel workers");
  app.add_option("--layer_offset", cfg.layer_offset, "First kept layer when subsampling");
  app.add_option("--bev_gt_dir", cfg.bev_gt_dir, "KITTI-road BEV ground truth, relative to the dataset root");
  app.add_option("--threshold", cfg.threshold, "Decision threshold");
  app.add_option("--aggregation", a.aggregation, "micro | macro")->check(CLI::IsMember({"micro", "macro"}));
  app.add_option("--pr_points", cfg.pr_points, "Maximum PR curve points");
  app.add_flag("--pr_png", cfg.pr_png, "Render eval/pr_curve.png");
  app.add_option("--predictions", a.predictions, "Directory of <frame id>.ltns confidence maps");
  app.add_option("--frame", a.frame, "Frame id to visualize");

  auto* featurize = app.add_subcommand("featurize", "Write feature and ground-truth tensors");
  auto* eval = app.add_subcommand("eval", "Score predictions against the featurized ground truth");
  auto* visualize = app.add_subcommand("visualize", "Render one featurized frame as PNG");
  auto* stats = app.add_subcommand("subsample-stats", "Layer and projection statistics");
  for (auto* sub : {featurize, eval, visualize, stats}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.dataset = lidarseg::parse_dataset_kind(a.dataset);
    cfg.view = lidarseg::parse_view(a.view);
    cfg.features = lidarseg::parse_feature_set(a.features);
    cfg.aggregation = lidarseg::parse_aggregation(a.aggregation);

    lidarseg::CommandResult r;
    if (featurize->parsed()) {
      r = lidarseg::cmd_featurize(cfg);
    } else if (eval->parsed()) {
      if (a.predictions.empty()) {
        std::cerr << "eval: --predictions is required\n";
        return 2;
      }
      r = lidarseg::cmd_eval(cfg, a.predictions);
    } else if (visualize->parsed()) {
      if (a.frame.empty()) {
        std::cerr << "visualize: --frame is required\n";
        return 2;
      }
      r = lidarseg::cmd_visualize(cfg, a.frame);
    } else {
      r = lidarseg::cmd_subsample_stats(cfg);
    }
    std::cout << r.summary;
    if (!r.errors.empty()) {
      std::cerr << r.errors.size() << " frame(s) failed\n";
    }
    return r.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
