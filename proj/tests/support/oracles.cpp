#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace mrf::oracle {

CVector isochromat_fingerprint(const TissueParams& tissue, const SequenceSchedule& schedule,
                               int spins) {
  const auto n = static_cast<std::size_t>(spins);
  std::vector<double> mx(n, 0.0), my(n, 0.0), mz(n, 1.0);
  auto relax = [&](double dt) {
    const double e1 = std::exp(-dt / tissue.t1_ms), e2 = std::exp(-dt / tissue.t2_ms);
    for (std::size_t j = 0; j < n; ++j) {
      mx[j] *= e2;
      my[j] *= e2;
      mz[j] = mz[j] * e1 + (1.0 - e1);
    }
  };
  if (schedule.inversion) {
    for (auto& z : mz) z = -z;
    relax(schedule.tinv_ms);
  }
  CVector signal(static_cast<Eigen::Index>(schedule.frames()));
  for (std::size_t t = 0; t < schedule.frames(); ++t) {
    const double a = schedule.flip_angles_deg[t] * std::numbers::pi / 180.0;
    const double ca = std::cos(a), sa = std::sin(a);
    for (std::size_t j = 0; j < n; ++j) {
      const double y = my[j], z = mz[j];
      my[j] = ca * y - sa * z;
      mz[j] = sa * y + ca * z;
    }
    relax(schedule.te_ms);
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += Complex(mx[j], my[j]);
    signal[static_cast<Eigen::Index>(t)] = sum / static_cast<double>(n);
    relax(schedule.tr_ms - schedule.te_ms);
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      const Complex m = Complex(mx[j], my[j]) * std::polar(1.0, theta);
      mx[j] = m.real();
      my[j] = m.imag();
    }
  }
  return signal;
}

CVector dft2(const CVector& image, ImageShape shape, bool inverse) {
  const auto H = static_cast<long>(shape.height), W = static_cast<long>(shape.width);
  const double sign = inverse ? 1.0 : -1.0;
  CVector out = CVector::Zero(image.size());
  for (long ky = 0; ky < H; ++ky) {
    for (long kx = 0; kx < W; ++kx) {
      Complex acc = 0.0;
      for (long y = 0; y < H; ++y) {
        for (long x = 0; x < W; ++x) {
          const double ph = sign * 2.0 * std::numbers::pi *
                            (static_cast<double>(ky * y) / static_cast<double>(H) +
                             static_cast<double>(kx * x) / static_cast<double>(W));
          acc += image[y * W + x] * std::polar(1.0, ph);
        }
      }
      out[ky * W + kx] = acc / std::sqrt(static_cast<double>(H * W));
    }
  }
  return out;
}

CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = g(rng);
      m(r, c) = Complex(re, g(rng));
    }
  }
  return m;
}

RVector random_real(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

namespace {

// forward differences (dx, dy) at pixel (y, x); zero past the last row/column
std::pair<double, double> diffs(const RVector& u, ImageShape s, std::size_t y, std::size_t x) {
  const auto at = [&](std::size_t yy, std::size_t xx) { return u[static_cast<Eigen::Index>(yy * s.width + xx)]; };
  const double dx = x + 1 < s.width ? at(y, x + 1) - at(y, x) : 0.0;
  const double dy = y + 1 < s.height ? at(y + 1, x) - at(y, x) : 0.0;
  return {dx, dy};
}

}  // namespace

double tv(const RVector& img, ImageShape shape, TvVariant variant) {
  double sum = 0.0;
  for (std::size_t y = 0; y < shape.height; ++y) {
    for (std::size_t x = 0; x < shape.width; ++x) {
      const auto [dx, dy] = diffs(img, shape, y, x);
      sum += variant == TvVariant::isotropic ? std::hypot(dx, dy) : std::abs(dx) + std::abs(dy);
    }
  }
  return sum;
}

double prox_objective(const RVector& u, const RVector& b, ImageShape shape, double tau,
                      TvVariant variant) {
  return 0.5 * (u - b).squaredNorm() + tau * tv(u, shape, variant);
}

double subgradient_prox_objective(const RVector& b, ImageShape shape, double tau, TvVariant variant,
                                  int iterations, RVector* best_u) {
  RVector u = b;
  double best = prox_objective(u, b, shape, tau, variant);
  RVector best_point = u;
  const auto W = shape.width;
  for (int k = 0; k < iterations; ++k) {
    RVector g = u - b;
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        const auto [dx, dy] = diffs(u, shape, y, x);
        double gx = 0.0, gy = 0.0;
        if (variant == TvVariant::isotropic) {
          const double m = std::hypot(dx, dy);
          if (m > 0.0) {
            gx = dx / m;
            gy = dy / m;
          }
        } else {
          gx = (dx > 0) - (dx < 0);
          gy = (dy > 0) - (dy < 0);
        }
        const auto i = static_cast<Eigen::Index>(y * W + x);
        if (x + 1 < W) {
          g[i] -= tau * gx;
          g[i + 1] += tau * gx;
        }
        if (y + 1 < shape.height) {
          g[i] -= tau * gy;
          g[i + static_cast<Eigen::Index>(W)] += tau * gy;
        }
      }
    }
    // the objective is 1-strongly convex
    const double step = 1.0 / static_cast<double>(k + 2);
    u -= step * g;
    const double f = prox_objective(u, b, shape, tau, variant);
    if (f < best) {
      best = f;
      best_point = u;
    }
  }
  if (best_u) *best_u = best_point;
  return best;
}

}  // namespace mrf::oracle
