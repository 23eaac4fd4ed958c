#include <gtest/gtest.h>

#include <random>

#include "mrf/tvprox.hpp"
#include "oracles.hpp"

using namespace mrf;

namespace {

TvConfig tight(TvVariant variant) {
  TvConfig c;
  c.variant = variant;
  c.max_iters = 5000;
  c.dual_gap_tol = 1e-14;
  return c;
}

RVector vec(std::initializer_list<double> v) {
  RVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(TvNorm, HandComputedValues) {
  for (auto variant : {TvVariant::isotropic, TvVariant::anisotropic}) {
    EXPECT_EQ(tv_norm(RVector::Constant(12, 3.5), {3, 4}, variant), 0.0);
    EXPECT_DOUBLE_EQ(tv_norm(vec({0, 1}), {2, 1}, variant), 1.0);
    EXPECT_DOUBLE_EQ(tv_norm(vec({0, 1, 0, 1}), {2, 2}, variant), 2.0);
  }
  // one pixel with both differences equal to 1
  EXPECT_DOUBLE_EQ(tv_norm(vec({0, 1, 1, 1}), {2, 2}, TvVariant::isotropic), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(tv_norm(vec({0, 1, 1, 1}), {2, 2}, TvVariant::anisotropic), 2.0);
}

TEST(TvNorm, MatchesPixelOracle) {
  std::mt19937_64 rng(1);
  for (auto variant : {TvVariant::isotropic, TvVariant::anisotropic}) {
    const RVector img = oracle::random_real(7 * 9, rng);
    EXPECT_NEAR(tv_norm(img, {7, 9}, variant), oracle::tv(img, {7, 9}, variant), 1e-12);
  }
}

TEST(TvProx, ZeroThresholdIsIdentity) {
  std::mt19937_64 rng(2);
  const RVector b = oracle::random_real(64, rng);
  EXPECT_EQ(tv_prox(b, {8, 8}, 0.0, {}), b);
}

TEST(TvProx, ConstantImageIsFixed) {
  const RVector b = RVector::Constant(30, -1.25);
  for (double tau : {0.1, 10.0}) {
    EXPECT_LT((tv_prox(b, {5, 6}, tau, {}) - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TvProx, TwoPixelClosedForm) {
  // minimizer of 0.5((u0)^2 + (u1-2)^2) + 0.5|u1-u0| is (0.5, 1.5)
  for (auto variant : {TvVariant::anisotropic, TvVariant::isotropic}) {
    const RVector u = tv_prox(vec({0.0, 2.0}), {1, 2}, 0.5, tight(variant));
    EXPECT_NEAR(u[0], 0.5, 1e-10);
    EXPECT_NEAR(u[1], 1.5, 1e-10);
  }
  // past the merge threshold both pixels meet at the mean
  const RVector m = tv_prox(vec({0.0, 2.0}), {1, 2}, 3.0, tight(TvVariant::anisotropic));
  EXPECT_NEAR(m[0], 1.0, 1e-10);
  EXPECT_NEAR(m[1], 1.0, 1e-10);
}

TEST(TvProx, TwoPixelBruteForce) {
  const RVector b = vec({0.3, -0.9});
  const double tau = 0.2;
  double best = 1e300;
  RVector arg(2);
  for (int i = -1500; i <= 1500; ++i) {
    for (int j = -1500; j <= 1500; ++j) {
      const RVector u = vec({i * 1e-3, j * 1e-3});
      const double f = oracle::prox_objective(u, b, {1, 2}, tau, TvVariant::anisotropic);
      if (f < best) {
        best = f;
        arg = u;
      }
    }
  }
  const RVector u = tv_prox(b, {1, 2}, tau, tight(TvVariant::anisotropic));
  EXPECT_LT((u - arg).cwiseAbs().maxCoeff(), 1.1e-3);
  EXPECT_LE(oracle::prox_objective(u, b, {1, 2}, tau, TvVariant::anisotropic), best + 1e-12);
}

TEST(TvProx, NoWorseThanSubgradientOracle) {
  std::mt19937_64 rng(3);
  const ImageShape s{8, 8};
  for (auto variant : {TvVariant::isotropic, TvVariant::anisotropic}) {
    for (double tau : {0.01, 0.1, 1.0}) {
      const RVector b = oracle::random_real(64, rng);
      const RVector u = tv_prox(b, s, tau, tight(variant));
      const double f = oracle::prox_objective(u, b, s, tau, variant);
      const double g = oracle::subgradient_prox_objective(b, s, tau, variant, 20000);
      EXPECT_LE(f, g * (1.0 + 1e-9)) << tau;
      EXPECT_LT(oracle::rel_err(f, g), 1e-3) << tau;
    }
  }
}

TEST(TvProx, DefaultSettingsReachSmallGap) {
  std::mt19937_64 rng(4);
  const RVector b = oracle::random_real(256, rng);
  TvProxStats stats;
  TvConfig cfg;
  cfg.max_iters = 2000;
  (void)tv_prox(b, {16, 16}, 0.1, cfg, nullptr, &stats);
  EXPECT_LE(stats.dual_gap, cfg.dual_gap_tol * b.squaredNorm());
  EXPECT_LT(stats.iterations, 2000);
}

TEST(TvProx, WarmStartConvergesFaster) {
  std::mt19937_64 rng(5);
  const ImageShape s{16, 16};
  const RVector b = oracle::random_real(256, rng);
  TvConfig cfg;
  cfg.max_iters = 2000;
  TvDual dual;
  TvProxStats cold, warm;
  const RVector u0 = tv_prox(b, s, 0.2, cfg, &dual, &cold);
  const RVector u1 = tv_prox(b, s, 0.2, cfg, &dual, &warm);
  EXPECT_LT(warm.iterations, cold.iterations);
  EXPECT_LT((u0 - u1).norm(), 1e-3 * b.norm());
}

TEST(TvProx, ZeroImageResetsDual) {
  TvDual dual{RVector::Ones(16), RVector::Ones(16)};
  const RVector u = tv_prox(RVector::Zero(16), {4, 4}, 1.0, {}, &dual);
  EXPECT_EQ(u.norm(), 0.0);
  EXPECT_EQ(dual.px.norm(), 0.0);
}

TEST(TvProxStack, RealStackStaysReal) {
  std::mt19937_64 rng(6);
  CMatrix x(64, 3);
  for (Eigen::Index j = 0; j < 3; ++j) x.col(j).real() = oracle::random_real(64, rng);
  x.imag().setZero();
  const CMatrix u = tv_prox_stack(x, {8, 8}, 0.3, {});
  EXPECT_EQ(u.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(TvProxStack, ChannelsAreIndependent) {
  std::mt19937_64 rng(7);
  const ImageShape s{8, 8};
  CMatrix x = oracle::random_complex(64, 2, rng);
  x.col(1).imag().setConstant(0.7);
  const TvConfig cfg = tight(TvVariant::isotropic);
  const CMatrix u = tv_prox_stack(x, s, 0.2, cfg);
  EXPECT_LT((u.col(1).imag().array() - 0.7).abs().maxCoeff(), 1e-12);
  const RVector ref = tv_prox(x.col(0).real(), s, 0.2, cfg);
  EXPECT_LT((u.col(0).real() - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(tv_norm_stack(x, s, TvVariant::isotropic),
              oracle::tv(x.col(0).real(), s, TvVariant::isotropic) + oracle::tv(x.col(0).imag(), s, TvVariant::isotropic) +
                  oracle::tv(x.col(1).real(), s, TvVariant::isotropic),
              1e-10);
}

TEST(TvProx, Validation) {
  EXPECT_THROW((void)tv_prox(RVector::Zero(4), {2, 2}, -1.0, {}), std::invalid_argument);
  EXPECT_THROW((void)tv_prox(RVector::Zero(5), {2, 2}, 1.0, {}), std::invalid_argument);
  TvConfig bad;
  bad.max_iters = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_EQ(parse_tv_variant("anisotropic"), TvVariant::anisotropic);
  EXPECT_THROW(parse_tv_variant("l0"), std::invalid_argument);
}
