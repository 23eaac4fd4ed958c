#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mrf/types.hpp"

namespace mrf {

enum class TvVariant { isotropic, anisotropic };

TvVariant parse_tv_variant(std::string_view name);
std::string to_string(TvVariant variant);

/// Forward differences with reflexive boundary (zero difference past the
/// last row and column).
struct TvConfig {
  TvVariant variant = TvVariant::isotropic;
  int max_iters = 50;
  double dual_gap_tol = 1e-6;
  bool warm_start = true;

  void validate() const;
};

/// Dual field (p, q) of one real image, reusable as a warm start.
struct TvDual {
  RVector px;
  RVector py;
};

struct TvProxStats {
  int iterations = 0;
  double dual_gap = 0.0;
};

/// Total variation of a real row-major image.
double tv_norm(const RVector& img, ImageShape shape, TvVariant variant);

/// argmin_u 0.5 ||u - img||^2 + tau TV(u) by fast gradient projection on the
/// dual. Stops once the duality gap drops below dual_gap_tol * ||img||^2 or
/// after max_iters. When `dual` is non-null and sized, it seeds the iteration
/// and receives the final dual field.
RVector tv_prox(const RVector& img, ImageShape shape, double tau, const TvConfig& cfg,
                TvDual* dual = nullptr, TvProxStats* stats = nullptr);

/// Warm-start state for a complex n x S stack: one dual per real and
/// imaginary channel image.
struct TvStackState {
  std::vector<TvDual> duals;
};

/// TV of a complex stack: sum over channels of TV(real) + TV(imag).
double tv_norm_stack(const CMatrix& stack, ImageShape shape, TvVariant variant);

/// Channel-separable prox over the real and imaginary parts of every column.
CMatrix tv_prox_stack(const CMatrix& stack, ImageShape shape, double tau, const TvConfig& cfg,
                      TvStackState* state = nullptr);

}  // namespace mrf
