#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lidarseg {

/// Per-pixel road probability, values in [0, 1].
struct ConfidenceMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  ConfidenceMap() = default;
  ConfidenceMap(std::size_t h, std::size_t w, std::vector<float> v);
};

struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> values;
};

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  [[nodiscard]] double precision() const noexcept;
  [[nodiscard]] double recall() const noexcept;
  [[nodiscard]] double f1() const noexcept;
  Confusion& operator+=(const Confusion& o) noexcept;
};

/// Counts over valid pixels with prediction = conf >= threshold. A null
/// `valid` means every pixel counts.
Confusion confusion(const ConfidenceMap& conf, const BinaryMask& gt, const BinaryMask* valid,
                    double threshold);

/// 2PR / (P + R), 0 when P + R = 0.
double f1_score(double precision, double recall);

/// A valid pixel's score and label.
struct ScoredSample {
  float score = 0.0F;
  bool positive = false;
};

std::vector<ScoredSample> collect_samples(const ConfidenceMap& conf, const BinaryMask& gt,
                                          const BinaryMask* valid);

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Step-wise AP = sum_n P_n (R_n - R_{n-1}) over the distinct scores taken in
/// descending order, R_0 = 0. Throws when there is no positive sample. The
/// samples are sorted in place.
double average_precision(std::vector<ScoredSample>& samples);
double average_precision(const ConfidenceMap& conf, const BinaryMask& gt, const BinaryMask* valid);

/// Curve ordered by increasing threshold. Uses every distinct score, or
/// `n_points` score quantiles when there are more distinct scores than that.
std::vector<PRPoint> pr_curve(std::vector<ScoredSample>& samples, std::size_t n_points);
std::vector<PRPoint> pr_curve(const ConfidenceMap& conf, const BinaryMask& gt,
                              const BinaryMask* valid, std::size_t n_points);

struct MetricsReport {
  std::string label;
  std::string aggregation = "frame";
  std::size_t frames = 1;
  double threshold = 0.5;
  Confusion counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Absent when the ground truth has no positives.
  std::optional<double> ap;
  std::vector<PRPoint> pr_curve;
};

MetricsReport evaluate(std::vector<ScoredSample> samples, double threshold, std::size_t n_points);

enum class Aggregation { kMicro, kMacro };

/// Collects per-frame results. Micro pools every pixel (confusion counts are
/// summed, AP is computed on the pooled samples); macro averages per-frame
/// scores, skipping frames without positives for AP.
class MetricsAccumulator {
 public:
  MetricsAccumulator(double threshold, std::size_t n_points);

  /// Scores one frame and keeps its samples for pooling.
  MetricsReport add(std::string label, std::vector<ScoredSample> samples);

  [[nodiscard]] MetricsReport aggregate(Aggregation mode) const;
  [[nodiscard]] std::size_t frames() const noexcept { return frames_.size(); }

 private:
  double threshold_;
  std::size_t n_points_;
  std::vector<ScoredSample> pooled_;
  std::vector<MetricsReport> frames_;
};

/// One key=value per line.
std::string format_report(const MetricsReport& r);
nlohmann::json to_json(const MetricsReport& r);

}  // namespace lidarseg
