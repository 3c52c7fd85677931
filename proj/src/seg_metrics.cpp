#include "lidarseg/seg_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "lidarseg/error.hpp"

namespace lidarseg {

ConfidenceMap::ConfidenceMap(std::size_t h, std::size_t w, std::vector<float> v)
    : height(h), width(w), values(std::move(v)) {
  if (values.size() != h * w) {
    throw Error(fmt::format("confidence map has {} values for {}x{}", values.size(), h, w));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0F && values[i] <= 1.0F)) {
      throw Error(fmt::format("confidence value {} at pixel {} is outside [0, 1]", values[i], i));
    }
  }
}

double Confusion::precision() const noexcept {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const noexcept {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::f1() const noexcept { return f1_score(precision(), recall()); }

Confusion& Confusion::operator+=(const Confusion& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

namespace {

void check_shapes(const ConfidenceMap& conf, const BinaryMask& gt, const BinaryMask* valid) {
  const bool gt_ok = gt.height == conf.height && gt.width == conf.width &&
                     gt.values.size() == conf.values.size();
  const bool valid_ok = valid == nullptr ||
                        (valid->height == conf.height && valid->width == conf.width &&
                         valid->values.size() == conf.values.size());
  if (!gt_ok || !valid_ok) {
    throw Error(fmt::format("shape mismatch: confidence {}x{}, ground truth {}x{}", conf.height,
                            conf.width, gt.height, gt.width));
  }
}

// Distinct scores in descending order with cumulative true/false positive
// counts at each threshold.
struct Sweep {
  std::vector<float> threshold;
  std::vector<std::uint64_t> tp;
  std::vector<std::uint64_t> fp;
  std::uint64_t positives = 0;
};

Sweep sweep(std::vector<ScoredSample>& samples) {
  std::sort(samples.begin(), samples.end(),
            [](const ScoredSample& a, const ScoredSample& b) { return a.score > b.score; });
  Sweep s;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < samples.size();) {
    const float t = samples[i].score;
    for (; i < samples.size() && samples[i].score == t; ++i) {
      (samples[i].positive ? tp : fp) += 1;
    }
    s.threshold.push_back(t);
    s.tp.push_back(tp);
    s.fp.push_back(fp);
  }
  s.positives = tp;
  return s;
}

}  // namespace

Confusion confusion(const ConfidenceMap& conf, const BinaryMask& gt, const BinaryMask* valid,
                    double threshold) {
  check_shapes(conf, gt, valid);
  Confusion c;
  for (std::size_t i = 0; i < conf.values.size(); ++i) {
    if (valid != nullptr && valid->values[i] == 0) {
      continue;
    }
    const bool pred = static_cast<double>(conf.values[i]) >= threshold;
    const bool truth = gt.values[i] != 0;
    if (pred && truth) {
      ++c.tp;
    } else if (pred) {
      ++c.fp;
    } else if (truth) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

std::vector<ScoredSample> collect_samples(const ConfidenceMap& conf, const BinaryMask& gt,
                                          const BinaryMask* valid) {
  check_shapes(conf, gt, valid);
  std::vector<ScoredSample> out;
  out.reserve(conf.values.size());
  for (std::size_t i = 0; i < conf.values.size(); ++i) {
    if (valid == nullptr || valid->values[i] != 0) {
      out.push_back({conf.values[i], gt.values[i] != 0});
    }
  }
  return out;
}

double average_precision(std::vector<ScoredSample>& samples) {
  const Sweep s = sweep(samples);
  if (s.positives == 0) {
    throw Error("average precision is undefined without positive samples");
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t n = 0; n < s.threshold.size(); ++n) {
    const double p = static_cast<double>(s.tp[n]) / static_cast<double>(s.tp[n] + s.fp[n]);
    const double r = static_cast<double>(s.tp[n]) / static_cast<double>(s.positives);
    ap += p * (r - prev_recall);
    prev_recall = r;
  }
  return ap;
}

double average_precision(const ConfidenceMap& conf, const BinaryMask& gt, const BinaryMask* valid) {
  auto samples = collect_samples(conf, gt, valid);
  return average_precision(samples);
}

std::vector<PRPoint> pr_curve(std::vector<ScoredSample>& samples, std::size_t n_points) {
  const Sweep s = sweep(samples);
  if (s.positives == 0) {
    throw Error("precision-recall curve is undefined without positive samples");
  }
  const auto point_at = [&](std::size_t n) {
    return PRPoint{s.threshold[n],
                   static_cast<double>(s.tp[n]) / static_cast<double>(s.tp[n] + s.fp[n]),
                   static_cast<double>(s.tp[n]) / static_cast<double>(s.positives)};
  };
  std::vector<PRPoint> curve;
  const std::size_t distinct = s.threshold.size();
  if (n_points == 0 || distinct <= n_points) {
    for (std::size_t n = distinct; n-- > 0;) {
      curve.push_back(point_at(n));
    }
    return curve;
  }
  // Quantiles of the sample scores; samples are sorted in descending order.
  std::vector<std::size_t> picks;
  const std::size_t total = samples.size();
  for (std::size_t q = 0; q < n_points; ++q) {
    const std::size_t rank = n_points == 1 ? 0 : (q * (total - 1)) / (n_points - 1);
    const float t = samples[total - 1 - rank].score;
    // Index of t in the descending distinct list.
    const auto it = std::lower_bound(s.threshold.begin(), s.threshold.end(), t,
                                     [](float a, float b) { return a > b; });
    picks.push_back(static_cast<std::size_t>(it - s.threshold.begin()));
  }
  std::sort(picks.begin(), picks.end(), std::greater<>());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  for (std::size_t n : picks) {
    curve.push_back(point_at(n));
  }
  return curve;
}

std::vector<PRPoint> pr_curve(const ConfidenceMap& conf, const BinaryMask& gt,
                              const BinaryMask* valid, std::size_t n_points) {
  auto samples = collect_samples(conf, gt, valid);
  return pr_curve(samples, n_points);
}

namespace {

Confusion confusion_of(const std::vector<ScoredSample>& samples, double threshold) {
  Confusion c;
  for (const auto& s : samples) {
    const bool pred = static_cast<double>(s.score) >= threshold;
    if (pred && s.positive) {
      ++c.tp;
    } else if (pred) {
      ++c.fp;
    } else if (s.positive) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

void fill_scores(MetricsReport& r) {
  r.precision = r.counts.precision();
  r.recall = r.counts.recall();
  r.f1 = f1_score(r.precision, r.recall);
}

}  // namespace

MetricsReport evaluate(std::vector<ScoredSample> samples, double threshold, std::size_t n_points) {
  MetricsReport r;
  r.threshold = threshold;
  r.counts = confusion_of(samples, threshold);
  fill_scores(r);
  if (r.counts.tp + r.counts.fn > 0) {
    r.ap = average_precision(samples);
    r.pr_curve = pr_curve(samples, n_points);
  }
  return r;
}

MetricsAccumulator::MetricsAccumulator(double threshold, std::size_t n_points)
    : threshold_(threshold), n_points_(n_points) {}

MetricsReport MetricsAccumulator::add(std::string label, std::vector<ScoredSample> samples) {
  pooled_.insert(pooled_.end(), samples.begin(), samples.end());
  MetricsReport r = evaluate(std::move(samples), threshold_, n_points_);
  r.label = std::move(label);
  frames_.push_back(r);
  return r;
}

MetricsReport MetricsAccumulator::aggregate(Aggregation mode) const {
  MetricsReport r;
  r.label = "aggregate";
  r.threshold = threshold_;
  r.frames = frames_.size();
  for (const auto& f : frames_) {
    r.counts += f.counts;
  }
  if (mode == Aggregation::kMicro) {
    r.aggregation = "micro";
    fill_scores(r);
    if (r.counts.tp + r.counts.fn > 0) {
      auto pooled = pooled_;
      r.ap = average_precision(pooled);
      r.pr_curve = pr_curve(pooled, n_points_);
    }
    return r;
  }
  r.aggregation = "macro";
  if (frames_.empty()) {
    return r;
  }
  double ap_sum = 0.0;
  std::size_t ap_frames = 0;
  for (const auto& f : frames_) {
    r.precision += f.precision;
    r.recall += f.recall;
    r.f1 += f.f1;
    if (f.ap) {
      ap_sum += *f.ap;
      ++ap_frames;
    }
  }
  const auto n = static_cast<double>(frames_.size());
  r.precision /= n;
  r.recall /= n;
  r.f1 /= n;
  if (ap_frames > 0) {
    r.ap = ap_sum / static_cast<double>(ap_frames);
  }
  return r;
}

std::string format_report(const MetricsReport& r) {
  std::string out;
  out += fmt::format("label={}\n", r.label);
  out += fmt::format("aggregation={}\n", r.aggregation);
  out += fmt::format("frames={}\n", r.frames);
  out += fmt::format("threshold={}\n", r.threshold);
  out += fmt::format("tp={}\nfp={}\nfn={}\ntn={}\n", r.counts.tp, r.counts.fp, r.counts.fn, r.counts.tn);
  out += fmt::format("precision={:.6f}\nrecall={:.6f}\nf1={:.6f}\n", r.precision, r.recall, r.f1);
  out += r.ap ? fmt::format("ap={:.6f}\n", *r.ap) : std::string("ap=undefined\n");
  out += fmt::format("pr_points={}\n", r.pr_curve.size());
  return out;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["aggregation"] = r.aggregation;
  j["frames"] = r.frames;
  j["threshold"] = r.threshold;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["tn"] = r.counts.tn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["ap"] = r.ap ? nlohmann::json(*r.ap) : nlohmann::json(nullptr);
  auto& curve = j["pr_curve"] = nlohmann::json::array();
  for (const auto& p : r.pr_curve) {
    curve.push_back({p.threshold, p.precision, p.recall});
  }
  return j;
}

}  // namespace lidarseg
