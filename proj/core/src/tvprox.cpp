#include "mrf/tvprox.hpp"

#include <algorithm>
#include <cmath>

namespace mrf {

TvVariant parse_tv_variant(std::string_view name) {
  if (name == "isotropic") return TvVariant::isotropic;
  if (name == "anisotropic") return TvVariant::anisotropic;
  throw std::invalid_argument("unknown TV variant '" + std::string(name) + "'");
}

std::string to_string(TvVariant variant) {
  return variant == TvVariant::isotropic ? "isotropic" : "anisotropic";
}

void TvConfig::validate() const {
  require(max_iters >= 1, "TV prox needs max_iters >= 1");
  require(dual_gap_tol > 0.0, "TV prox needs a positive dual-gap tolerance");
}

namespace {

void gradient(const RVector& u, ImageShape s, RVector& gx, RVector& gy) {
  const auto h = static_cast<Eigen::Index>(s.height);
  const auto w = static_cast<Eigen::Index>(s.width);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index i = y * w + x;
      gx[i] = x + 1 < w ? u[i + 1] - u[i] : 0.0;
      gy[i] = y + 1 < h ? u[i + w] - u[i] : 0.0;
    }
  }
}

// div = -D^T; entries of px in the last column and py in the last row are ignored
void divergence(const RVector& px, const RVector& py, ImageShape s, RVector& out) {
  const auto h = static_cast<Eigen::Index>(s.height);
  const auto w = static_cast<Eigen::Index>(s.width);
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index i = y * w + x;
      double v = 0.0;
      if (x + 1 < w) v += px[i];
      if (x >= 1) v -= px[i - 1];
      if (y + 1 < h) v += py[i];
      if (y >= 1) v -= py[i - w];
      out[i] = v;
    }
  }
}

void project_dual(RVector& px, RVector& py, TvVariant variant) {
  if (variant == TvVariant::isotropic) {
    for (Eigen::Index i = 0; i < px.size(); ++i) {
      const double mag = std::hypot(px[i], py[i]);
      if (mag > 1.0) {
        px[i] /= mag;
        py[i] /= mag;
      }
    }
  } else {
    px = px.cwiseMax(-1.0).cwiseMin(1.0);
    py = py.cwiseMax(-1.0).cwiseMin(1.0);
  }
}

double tv_from_gradient(const RVector& gx, const RVector& gy, TvVariant variant) {
  double sum = 0.0;
  if (variant == TvVariant::isotropic) {
    for (Eigen::Index i = 0; i < gx.size(); ++i) sum += std::hypot(gx[i], gy[i]);
  } else {
    sum = gx.cwiseAbs().sum() + gy.cwiseAbs().sum();
  }
  return sum;
}

}  // namespace

double tv_norm(const RVector& img, ImageShape shape, TvVariant variant) {
  require(shape.height >= 1 && shape.width >= 1, "image must be non-empty");
  require(img.size() == static_cast<Eigen::Index>(shape.voxels()), "image size does not match shape");
  RVector gx(img.size()), gy(img.size());
  gradient(img, shape, gx, gy);
  return tv_from_gradient(gx, gy, variant);
}

RVector tv_prox(const RVector& img, ImageShape shape, double tau, const TvConfig& cfg,
                TvDual* dual, TvProxStats* stats) {
  require(tau >= 0.0 && std::isfinite(tau), "TV threshold must be non-negative");
  require(img.size() == static_cast<Eigen::Index>(shape.voxels()), "image size does not match shape");
  cfg.validate();
  if (stats != nullptr) *stats = {};
  if (tau == 0.0) return img;

  const Eigen::Index n = img.size();
  if (img.isZero(0.0)) {
    // prox of the zero image is zero; a stale warm start must not leak in
    if (dual != nullptr) {
      dual->px = RVector::Zero(n);
      dual->py = RVector::Zero(n);
    }
    return img;
  }
  RVector px = RVector::Zero(n), py = RVector::Zero(n);
  if (dual != nullptr && dual->px.size() == n && dual->py.size() == n) {
    px = dual->px;
    py = dual->py;
    project_dual(px, py, cfg.variant);
  }
  RVector rx = px, ry = py;
  RVector prev_x(n), prev_y(n), u(n), div(n), gx(n), gy(n);

  const double step = 1.0 / (8.0 * tau);
  const double energy = img.squaredNorm();
  double t = 1.0;
  int it = 0;
  double gap = 0.0;
  for (; it < cfg.max_iters;) {
    divergence(rx, ry, shape, div);
    u = img + tau * div;
    gradient(u, shape, gx, gy);
    prev_x = px;
    prev_y = py;
    px = rx + step * gx;
    py = ry + step * gy;
    project_dual(px, py, cfg.variant);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    rx = px + beta * (px - prev_x);
    ry = py + beta * (py - prev_y);
    t = t_next;
    ++it;

    // duality gap at the current feasible dual point
    divergence(px, py, shape, div);
    u = img + tau * div;
    gradient(u, shape, gx, gy);
    const double primal = 0.5 * (u - img).squaredNorm() + tau * tv_from_gradient(gx, gy, cfg.variant);
    const double dual_value = 0.5 * energy - 0.5 * u.squaredNorm();
    gap = primal - dual_value;
    if (gap <= cfg.dual_gap_tol * energy) break;
  }

  if (dual != nullptr) {
    dual->px = px;
    dual->py = py;
  }
  if (stats != nullptr) {
    stats->iterations = it;
    stats->dual_gap = gap;
  }
  divergence(px, py, shape, div);
  return img + tau * div;
}

double tv_norm_stack(const CMatrix& stack, ImageShape shape, TvVariant variant) {
  require(stack.rows() == static_cast<Eigen::Index>(shape.voxels()), "stack rows must equal H*W");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < stack.cols(); ++j) {
    sum += tv_norm(stack.col(j).real(), shape, variant);
    sum += tv_norm(stack.col(j).imag(), shape, variant);
  }
  return sum;
}

CMatrix tv_prox_stack(const CMatrix& stack, ImageShape shape, double tau, const TvConfig& cfg,
                      TvStackState* state) {
  require(stack.rows() == static_cast<Eigen::Index>(shape.voxels()), "stack rows must equal H*W");
  require(tau >= 0.0 && std::isfinite(tau), "TV threshold must be non-negative");
  cfg.validate();
  if (tau == 0.0) return stack;

  const auto channels = static_cast<std::ptrdiff_t>(2 * stack.cols());
  const bool warm = cfg.warm_start && state != nullptr;
  if (warm) state->duals.resize(static_cast<std::size_t>(channels));

  RMatrix parts(stack.rows(), channels);
  for (Eigen::Index j = 0; j < stack.cols(); ++j) {
    parts.col(2 * j) = stack.col(j).real();
    parts.col(2 * j + 1) = stack.col(j).imag();
  }
  RMatrix result(stack.rows(), channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    TvDual* dual = warm ? &state->duals[static_cast<std::size_t>(c)] : nullptr;
    result.col(c) = tv_prox(parts.col(c), shape, tau, cfg, dual);
  }
  CMatrix out(stack.rows(), stack.cols());
  for (Eigen::Index j = 0; j < stack.cols(); ++j) {
    out.col(j).real() = result.col(2 * j);
    out.col(j).imag() = result.col(2 * j + 1);
  }
  return out;
}

}  // namespace mrf
