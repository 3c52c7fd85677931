#include "lidarseg/layering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "lidarseg/error.hpp"

namespace lidarseg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Steps this far backwards (mod 2*pi) are jitter, not a near-full forward turn.
constexpr double kBacktrackTolerance = std::numbers::pi / 4.0;
constexpr double kSeamCloseThreshold = kTwoPi - std::numbers::pi / 2.0;

double positive_mod(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  return r;
}

}  // namespace

std::vector<std::size_t> LayeredScan::layer_point_counts() const {
  std::vector<std::size_t> counts(n_layers, 0);
  for (auto l : layer_of) {
    ++counts[l];
  }
  return counts;
}

AzimuthTrace compute_azimuth(const PointCloudScan& scan) {
  if (scan.empty()) {
    throw Error("compute_azimuth: empty scan");
  }
  AzimuthTrace trace;
  trace.phi.resize(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto& p = scan.points[i];
    if (p.x == 0.0F && p.y == 0.0F) {
      trace.phi[i] = 0.0;
      ++trace.degenerate;
      continue;
    }
    trace.phi[i] = std::atan2(static_cast<double>(p.y), static_cast<double>(p.x));
  }
  return trace;
}

LayeredScan assign_layers(PointCloudScan scan) {
  const std::size_t n = scan.size();
  if (n < 2) {
    throw Error(fmt::format("assign_layers: need at least 2 points, got {}", n));
  }
  const AzimuthTrace trace = compute_azimuth(scan);

  std::vector<std::size_t> usable;
  usable.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = scan.points[i];
    if (!(p.x == 0.0F && p.y == 0.0F)) {
      usable.push_back(i);
    }
  }

  // Majority vote on the wrapped step sign fixes the rotation direction.
  std::size_t forward = 0;
  std::size_t backward = 0;
  for (std::size_t k = 1; k < usable.size(); ++k) {
    double d = trace.phi[usable[k]] - trace.phi[usable[k - 1]];
    d = std::remainder(d, kTwoPi);
    if (d > 0.0) {
      ++forward;
    } else if (d < 0.0) {
      ++backward;
    }
  }
  if (forward == 0 && backward == 0) {
    throw Error(fmt::format(
        "assign_layers: azimuth trace shows no rotation ({} points, {} with x=y=0, {} usable)", n,
        trace.degenerate, usable.size()));
  }
  const double direction = forward >= backward ? 1.0 : -1.0;

  std::vector<double> steps(usable.size(), 0.0);
  std::vector<double> positive_steps;
  positive_steps.reserve(usable.size());
  for (std::size_t k = 1; k < usable.size(); ++k) {
    double s = positive_mod(direction * (trace.phi[usable[k]] - trace.phi[usable[k - 1]]));
    if (s > kTwoPi - kBacktrackTolerance) {
      s -= kTwoPi;
    }
    steps[k] = s;
    if (s > 0.0) {
      positive_steps.push_back(s);
    }
  }
  double close_tolerance = 0.0;
  if (!positive_steps.empty()) {
    auto mid = positive_steps.begin() + static_cast<std::ptrdiff_t>(positive_steps.size() / 2);
    std::nth_element(positive_steps.begin(), mid, positive_steps.end());
    close_tolerance = 0.5 * *mid;
  }

  LayeredScan ls;
  ls.layer_of.assign(n, 0);
  ls.origin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ls.origin[i] = static_cast<std::uint32_t>(i);
  }

  std::size_t layer = 0;
  double turned = 0.0;
  std::size_t next_usable = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (next_usable < usable.size() && usable[next_usable] == i) {
      const double raw = direction * (trace.phi[i] - trace.phi[usable[next_usable - 1]]);
      const bool seam = raw < -std::numbers::pi;
      turned += steps[next_usable];
      if (turned >= kTwoPi - close_tolerance || (seam && turned >= kSeamCloseThreshold)) {
        ++layer;
        turned = 0.0;
      }
      ++next_usable;
    }
    if (layer > 0xFFFF) {
      throw Error("assign_layers: more than 65535 layers detected");
    }
    ls.layer_of[i] = static_cast<std::uint16_t>(layer);
  }
  ls.n_layers = layer + 1;
  ls.scan = std::move(scan);
  return ls;
}

LayeredScan subsample(const LayeredScan& ls, int keep_every, int offset) {
  if (keep_every < 1 || offset < 0 || offset >= keep_every) {
    throw Error(fmt::format("subsample: need 0 <= offset < keep_every, got keep_every={} offset={}",
                            keep_every, offset));
  }
  const auto k = static_cast<std::size_t>(keep_every);
  const auto o = static_cast<std::size_t>(offset);
  LayeredScan out;
  out.n_layers = ls.n_layers > o ? (ls.n_layers - o + k - 1) / k : 0;
  out.scan.reflectivity_clamped = ls.scan.reflectivity_clamped;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const std::size_t l = ls.layer_of[i];
    if (l % k != o) {
      continue;
    }
    out.scan.points.push_back(ls.scan.points[i]);
    out.layer_of.push_back(static_cast<std::uint16_t>((l - o) / k));
    out.origin.push_back(ls.origin[i]);
  }
  return out;
}

}  // namespace lidarseg
