#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lidarseg/error.hpp"
#include "lidarseg/layering.hpp"
#include "lidarseg/normal_est.hpp"
#include "sim.hpp"

using namespace lidarseg;
constexpr double kPi = std::numbers::pi;
constexpr double kH = 1.73;

namespace {

std::vector<double> even_thetas(double first, double step, std::size_t rows) {
  std::vector<double> t(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    t[r] = first + step * static_cast<double>(r);
  }
  return t;
}

double plane_range(double, double theta) { return theta > kPi / 2 ? -kH / std::cos(theta) : NAN; }

double wall_range(double phi, double theta) {
  const double s = std::sin(phi) * std::sin(theta);
  return s > 0.05 ? 5.0 / s : NAN;
}

double angle_error(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
}

}  // namespace

TEST(BackProject, InvertsSpherical) {
  const Eigen::Vector3d p(3.0, -4.0, 1.5);
  const auto s = to_spherical(p.x(), p.y(), p.z());
  EXPECT_LT((back_project(s.phi, s.theta, s.rho) - p).norm(), 1e-12);
}

TEST(Normals, SphereIsAntiRadial) {
  const SVImage sv = sim::surface_sv(even_thetas(1.2, 0.007, 64), 2048, [](double, double) { return 12.5; });
  const NormalMap nm = estimate_normals(sv);
  EXPECT_EQ(nm.valid_count(), 63U * 2048U);
  double worst = 0;
  for (std::size_t k = 0; k < sv.cells(); ++k) {
    if (nm.valid[k] != 0) {
      const Eigen::Vector3d u = back_project(sv.cell_phi[k], sv.cell_theta[k], 1.0);
      worst = std::max(worst, (nm.normal[k] + u).norm());
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Normals, UnitNormAndSensorFacing) {
  sim::ScanOptions opt;
  opt.seed = 5;
  const LayeredScan ls = assign_layers(sim::simulate_scan(opt).scan);
  const SVImage sv = project_sv(ls);
  const NormalMap nm = estimate_normals(sv);
  ASSERT_GT(nm.valid_count(), sv.cells() / 2);
  for (std::size_t k = 0; k < sv.cells(); ++k) {
    if (nm.valid[k] == 0) {
      EXPECT_EQ(nm.normal[k], Eigen::Vector3d::Zero());
      continue;
    }
    EXPECT_NEAR(nm.normal[k].norm(), 1.0, 1e-6);
    EXPECT_LE(nm.normal[k].dot(back_project(sv.cell_phi[k], sv.cell_theta[k], sv.min_radial[k])), 0.0);
  }
}

TEST(Normals, PlaneErrorIsFirstOrderInPolarStep) {
  for (const double step : {0.008, 0.004, 0.002}) {
    const SVImage sv = sim::surface_sv(even_thetas(1.75, step, 64), 2048, plane_range);
    const NormalMap nm = estimate_normals(sv);
    double worst = 0;
    for (std::size_t k = 0; k < sv.cells(); ++k) {
      if (nm.valid[k] != 0) {
        worst = std::max(worst, angle_error(nm.normal[k], {0, 0, 1}));
      }
    }
    EXPECT_LE(worst, step) << "step " << step;
    EXPECT_GT(nm.valid_count(), 60U * 2048U);
  }
}

TEST(Normals, PlaneErrorHalvesWithSpacing) {
  std::vector<double> errs;
  for (int k = 0; k < 4; ++k) {
    const double step = 0.008 / std::pow(2.0, k);
    const SVImage sv = sim::surface_sv(even_thetas(1.9, step, 16), 2048, plane_range);
    const NormalMap nm = estimate_normals(sv);
    ASSERT_TRUE(nm.valid[sv.index(0, 300)]);
    errs.push_back(angle_error(nm.normal[sv.index(0, 300)], {0, 0, 1}));
  }
  for (int k = 0; k + 1 < 4; ++k) {
    EXPECT_NEAR(errs[k] / errs[k + 1], 2.0, 0.15) << k;
  }
}

TEST(Normals, WallConvergesToAnalyticNormal) {
  std::vector<double> errs;
  for (int k = 0; k < 4; ++k) {
    const std::size_t width = 2048U << k;
    const double step = 0.008 / std::pow(2.0, k);
    const SVImage sv = sim::surface_sv(even_thetas(1.5, step, 8), width, wall_range);
    const NormalMap nm = estimate_normals(sv);
    // Column whose azimuth is near 1.2 rad.
    const auto col = static_cast<std::size_t>((1.2 + kPi) / (2 * kPi) * width);
    ASSERT_TRUE(nm.valid[sv.index(0, col)]);
    errs.push_back(angle_error(nm.normal[sv.index(0, col)], {0, -1, 0}));
  }
  EXPECT_LT(errs[0], 0.008);
  for (int k = 0; k + 1 < 4; ++k) {
    EXPECT_NEAR(errs[k] / errs[k + 1], 2.0, 0.2) << k;
  }
}

TEST(RangeGradients, FirstOrderConvergence) {
  const double theta0 = 1.95;
  const double exact = -kH * std::sin(theta0) / (std::cos(theta0) * std::cos(theta0));
  std::vector<double> errs;
  for (int k = 0; k < 4; ++k) {
    const double step = 0.01 / std::pow(2.0, k);
    const SVImage sv = sim::surface_sv(even_thetas(theta0, step, 4), 2048, plane_range);
    const auto g = range_gradients(sv, 0, 100);
    ASSERT_TRUE(g);
    EXPECT_NEAR(g->delta_theta, step, 1e-15);
    EXPECT_NEAR(g->delta_phi, 2 * kPi / 2048, 1e-12);
    EXPECT_NEAR(g->d_phi, 0.0, 1e-9);
    errs.push_back(std::abs(g->d_theta - exact));
  }
  for (int k = 0; k + 1 < 4; ++k) {
    EXPECT_NEAR(errs[k] / errs[k + 1], 2.0, 0.1);
  }
}

TEST(RangeGradients, NeighbourRules) {
  SVImage sv = sim::surface_sv(even_thetas(1.8, 0.01, 3), 16, plane_range);
  EXPECT_TRUE(range_gradients(sv, 0, 15));
  EXPECT_FALSE(range_gradients(sv, 0, 15, NormalOptions{.wrap_azimuth = false}));
  EXPECT_FALSE(range_gradients(sv, 2, 0));  // no next row
  sv.occupancy[sv.index(1, 4)] = 0;
  EXPECT_FALSE(range_gradients(sv, 0, 4));
  EXPECT_FALSE(range_gradients(sv, 1, 3));
  EXPECT_FALSE(range_gradients(sv, 1, 4));
  // Coincident polar angles make the step degenerate.
  sv.cell_theta[sv.index(1, 7)] = sv.cell_theta[sv.index(0, 7)];
  EXPECT_FALSE(range_gradients(sv, 0, 7));
  const NormalMap nm = estimate_normals(sv);
  EXPECT_EQ(nm.valid[sv.index(0, 7)], 0);
}

TEST(Normals, TensorAndPointTransfer) {
  sim::ScanOptions opt;
  opt.points_per_ring = 800;
  const LayeredScan ls = assign_layers(sim::simulate_scan(opt).scan);
  const SVImage sv = project_sv(ls);
  const NormalMap nm = estimate_normals(sv);
  const Tensor t = to_normal_tensor(nm);
  EXPECT_EQ(t.channels(), 4U);
  EXPECT_EQ(t.name(), "sv_normals");
  const PointNormals pn = normals_to_points(ls, sv, nm);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const std::size_t cell = sv.point_cell[i];
    EXPECT_EQ(pn.valid[i], nm.valid[cell]);
    EXPECT_EQ(t.data()[cell * 4 + 3], nm.valid[cell] ? 1.0F : 0.0F);
    if (pn.valid[i]) {
      EXPECT_EQ(pn.normal[i], nm.normal[cell]);
    }
  }
  EXPECT_THROW(normals_to_points(subsample(ls, 2), sv, nm), Error);
}
