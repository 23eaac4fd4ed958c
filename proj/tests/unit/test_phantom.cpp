#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mrf/phantom.hpp"

using namespace mrf;

namespace {

PhantomRegion rect(double cx, double cy, double rx, double ry, double t1, double t2, double pd) {
  return {ShapeKind::rectangle, cx, cy, rx, ry, 0.0, t1, t2, pd};
}

}  // namespace

TEST(Phantom, FullFieldRectangle) {
  const GroundTruth gt = make_phantom({6, 10}, {rect(0, 0, 1, 1, 900, 90, 0.7)});
  EXPECT_EQ(gt.t1.minCoeff(), 900.0);
  EXPECT_EQ(gt.t2.maxCoeff(), 90.0);
  EXPECT_EQ(gt.pd.minCoeff(), 0.7);
  for (auto l : gt.labels) EXPECT_EQ(l, 1);
  for (bool f : gt.foreground()) EXPECT_TRUE(f);
}

TEST(Phantom, LaterRegionsPaintOver) {
  // right half of a 4x4 grid: x centers at -0.75, -0.25, 0.25, 0.75
  const GroundTruth gt = make_phantom({4, 4}, {rect(0, 0, 1, 1, 900, 90, 1.0), rect(0.5, 0, 0.5, 1, 1500, 150, 0.5)});
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      const auto i = static_cast<Eigen::Index>(y * 4 + x);
      EXPECT_EQ(gt.t1[i], x >= 2 ? 1500.0 : 900.0);
      EXPECT_EQ(gt.labels[static_cast<std::size_t>(i)], x >= 2 ? 2 : 1);
    }
  }
}

TEST(Phantom, EllipseAreaAndRotation) {
  const ImageShape s{200, 200};
  PhantomRegion e{ShapeKind::ellipse, 0.1, -0.2, 0.5, 0.3, 0.0, 1000, 100, 1.0};
  const GroundTruth gt = make_phantom(s, {e});
  const double pixels = static_cast<double>(std::count(gt.labels.begin(), gt.labels.end(), 1));
  const double expected = std::numbers::pi * 0.5 * 0.3 / 4.0 * 40000.0;
  EXPECT_NEAR(pixels, expected, 0.05 * expected);
  e.angle_deg = 90.0;
  EXPECT_TRUE(e.contains(0.1, -0.2 + 0.45));
  EXPECT_FALSE(e.contains(0.1 + 0.45, -0.2));
}

TEST(Phantom, DefaultHeadHasAllTissues) {
  const GroundTruth gt = make_phantom({64, 64}, default_head_spec());
  for (double t1 : {800.0, 1300.0, 3500.0}) {
    EXPECT_TRUE((gt.t1.array() == t1).any()) << t1;
  }
  EXPECT_TRUE((gt.pd.array() == 0.0).any());
  const auto off = offgrid_head_spec();
  EXPECT_EQ(off[2].t1_ms, 830.0);
  EXPECT_EQ(off[0].t2_ms, 455.0);
}

TEST(Phantom, Validation) {
  EXPECT_THROW(make_phantom({4, 4}, {}), std::invalid_argument);
  EXPECT_THROW(make_phantom({4, 4}, {rect(0, 0, 0, 1, 900, 90, 1)}), std::invalid_argument);
  EXPECT_THROW(make_phantom({4, 4}, {rect(0, 0, 1, 1, 0, 90, 1)}), std::invalid_argument);
  EXPECT_NO_THROW(make_phantom({4, 4}, {rect(0, 0, 1, 1, 0, 0, 0)}));
  EXPECT_EQ(parse_shape_kind("rectangle"), ShapeKind::rectangle);
  EXPECT_THROW(parse_shape_kind("star"), std::invalid_argument);
}

TEST(Synthesis, SeriesArePdScaledAtoms) {
  const auto schedule = default_schedule(30);
  const GroundTruth gt = make_phantom({8, 8}, {rect(0, 0, 1, 1, 1000, 100, 0.5), rect(0, 0, 0.5, 0.5, 1000, 100, 2.0),
                                               rect(0.75, 0.75, 0.25, 0.25, 0, 0, 0)});
  const CMatrix series = synthesize_timeseries(gt, schedule, 30);
  const CVector atom = simulate_fingerprint({1000, 100}, schedule, 30);
  for (Eigen::Index i = 0; i < 64; ++i) {
    const CVector expected = atom * gt.pd[i];
    EXPECT_LT((series.row(i).transpose() - expected).norm(), 1e-12) << i;
  }
  EXPECT_EQ(series.row(63).norm(), 0.0);
}

TEST(Scoring, HandComputedValues) {
  const GroundTruth gt = make_phantom({2, 2}, {rect(0, 0, 1, 1, 1000, 100, 1)});
  RVector t1 = gt.t1, t2 = gt.t2;
  t1.array() += 10.0;
  t2[0] += 3.0;
  t2[1] -= 4.0;
  const MapScores s = score_maps(t1, t2, gt, {true, true, true, true});
  EXPECT_DOUBLE_EQ(s.t1.rmse, 10.0);
  EXPECT_DOUBLE_EQ(s.t1.mae, 10.0);
  EXPECT_DOUBLE_EQ(s.t2.rmse, std::sqrt(25.0 / 4.0));
  EXPECT_DOUBLE_EQ(s.t2.mae, 7.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.t1.region_means.at(1), 1010.0);
  EXPECT_EQ(s.voxels, 4u);

  const MapScores exact = score_maps(gt.t1, gt.t2, gt, {true, false, true, false});
  EXPECT_EQ(exact.t1.rmse, 0.0);
  EXPECT_EQ(exact.voxels, 2u);
}

TEST(Scoring, NormalizedByTruthRange) {
  const GroundTruth gt = make_phantom({1, 2}, {rect(-0.5, 0, 0.5, 1, 1000, 100, 1), rect(0.5, 0, 0.5, 1, 1500, 200, 1)});
  RVector t1 = gt.t1;
  t1.array() += 50.0;
  const ParameterScore s = score_parameter(t1, gt.t1, gt.labels, {true, true});
  EXPECT_DOUBLE_EQ(s.nrmse, 50.0 / 500.0);
}

TEST(Scoring, GaussianErrorsGiveSigma) {
  const GroundTruth gt = make_phantom({128, 128}, {rect(0, 0, 1, 1, 1000, 100, 1)});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 25.0);
  RVector t1 = gt.t1;
  for (Eigen::Index i = 0; i < t1.size(); ++i) t1[i] += g(rng);
  const ParameterScore s = score_parameter(t1, gt.t1, gt.labels, gt.foreground());
  EXPECT_NEAR(s.rmse, 25.0, 0.05 * 25.0);
  EXPECT_NEAR(s.mae, 25.0 * std::sqrt(2.0 / std::numbers::pi), 0.05 * 25.0);
}

TEST(Scoring, EmptyMaskThrows) {
  const GroundTruth gt = make_phantom({2, 2}, {rect(0, 0, 1, 1, 1000, 100, 1)});
  EXPECT_THROW(score_maps(gt.t1, gt.t2, gt, {false, false, false, false}), std::invalid_argument);
  EXPECT_THROW(score_maps(gt.t1, gt.t2, gt, {true}), std::invalid_argument);
}
