#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mrf/epg.hpp"
#include "mrf/types.hpp"

namespace mrf {

enum class ShapeKind { ellipse, rectangle };

/// One painted region. Geometry is in normalized field-of-view coordinates:
/// x and y run from -1 (left/top edge) to +1 (right/bottom edge).
struct PhantomRegion {
  ShapeKind kind = ShapeKind::ellipse;
  double center_x = 0.0;
  double center_y = 0.0;
  double radius_x = 1.0;  ///< semi-axis (ellipse) or half-width (rectangle)
  double radius_y = 1.0;
  double angle_deg = 0.0;
  double t1_ms = 0.0;
  double t2_ms = 0.0;
  double pd = 0.0;

  [[nodiscard]] bool contains(double x, double y) const;
};

using PhantomSpec = std::vector<PhantomRegion>;

/// Tissue values of the default head-like layout, (T1 ms, T2 ms, PD).
struct TissueClass {
  double t1_ms, t2_ms, pd;
};

struct HeadTissues {
  TissueClass white{800.0, 80.0, 0.8};
  TissueClass gray{1300.0, 110.0, 0.9};
  TissueClass fluid{3500.0, 500.0, 1.0};
};

/// Nested ellipses: fluid rim, gray matter, white matter core and two
/// fluid-filled ventricles.
PhantomSpec default_head_spec(const HeadTissues& tissues = {});

/// Same layout with tissue values placed between dictionary grid points.
PhantomSpec offgrid_head_spec();

ShapeKind parse_shape_kind(std::string_view name);
std::string to_string(ShapeKind kind);

struct GroundTruth {
  ImageShape shape;
  RVector t1;  ///< ms, row-major
  RVector t2;
  RVector pd;
  std::vector<std::int32_t> labels;  ///< 0 background, k for region k-1 of the spec

  [[nodiscard]] std::vector<bool> foreground() const;
};

/// Rasterizes the regions at pixel centers in painter's order.
GroundTruth make_phantom(ImageShape shape, const PhantomSpec& spec);

/// Per-voxel pd * fingerprint(t1, t2) as an n x L stack of row series.
CMatrix synthesize_timeseries(const GroundTruth& gt, const SequenceSchedule& schedule,
                              std::size_t k_max);

struct ParameterScore {
  double rmse = 0.0;
  double mae = 0.0;
  double nrmse = 0.0;  ///< rmse over the ground-truth range on the mask
  std::map<std::int32_t, double> region_means;
};

struct MapScores {
  ParameterScore t1;
  ParameterScore t2;
  std::size_t voxels = 0;
};

/// Error of estimated maps against ground truth over `mask`.
MapScores score_maps(const RVector& est_t1, const RVector& est_t2, const GroundTruth& gt,
                     const std::vector<bool>& mask);

ParameterScore score_parameter(const RVector& est, const RVector& truth,
                               const std::vector<std::int32_t>& labels,
                               const std::vector<bool>& mask);

}  // namespace mrf
