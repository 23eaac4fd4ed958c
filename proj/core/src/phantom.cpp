#include "mrf/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mrf {

bool PhantomRegion::contains(double x, double y) const {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double dx = x - center_x, dy = y - center_y;
  const double u = std::cos(a) * dx + std::sin(a) * dy;
  const double v = -std::sin(a) * dx + std::cos(a) * dy;
  if (kind == ShapeKind::rectangle) return std::abs(u) <= radius_x && std::abs(v) <= radius_y;
  const double nu = u / radius_x, nv = v / radius_y;
  return nu * nu + nv * nv <= 1.0;
}

PhantomSpec default_head_spec(const HeadTissues& tissues) {
  auto region = [](double cx, double cy, double rx, double ry, double angle, const TissueClass& t) {
    return PhantomRegion{ShapeKind::ellipse, cx, cy, rx, ry, angle, t.t1_ms, t.t2_ms, t.pd};
  };
  return {
      region(0.0, 0.0, 0.80, 0.92, 0.0, tissues.fluid),
      region(0.0, 0.0, 0.72, 0.84, 0.0, tissues.gray),
      region(0.0, 0.05, 0.50, 0.60, 0.0, tissues.white),
      region(-0.18, -0.05, 0.12, 0.30, 15.0, tissues.fluid),
      region(0.18, -0.05, 0.12, 0.30, -15.0, tissues.fluid),
  };
}

PhantomSpec offgrid_head_spec() {
  return default_head_spec(HeadTissues{{830.0, 83.0, 0.8}, {1270.0, 107.0, 0.9}, {3420.0, 455.0, 1.0}});
}

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "rectangle") return ShapeKind::rectangle;
  throw std::invalid_argument("unknown phantom shape '" + std::string(name) + "'");
}

std::string to_string(ShapeKind kind) { return kind == ShapeKind::ellipse ? "ellipse" : "rectangle"; }

std::vector<bool> GroundTruth::foreground() const {
  std::vector<bool> fg(static_cast<std::size_t>(pd.size()));
  for (Eigen::Index i = 0; i < pd.size(); ++i) fg[static_cast<std::size_t>(i)] = pd[i] > 0.0;
  return fg;
}

GroundTruth make_phantom(ImageShape shape, const PhantomSpec& spec) {
  require(!spec.empty(), "phantom spec is empty");
  require(shape.voxels() > 0, "phantom grid is empty");
  for (const auto& r : spec) {
    require(r.radius_x > 0.0 && r.radius_y > 0.0, "phantom region radii must be positive");
    require(r.pd >= 0.0, "proton density must be non-negative");
    require(r.pd == 0.0 || (r.t1_ms > 0.0 && r.t2_ms > 0.0),
            "regions with signal need positive T1 and T2");
  }
  GroundTruth gt;
  gt.shape = shape;
  const auto n = static_cast<Eigen::Index>(shape.voxels());
  gt.t1 = RVector::Zero(n);
  gt.t2 = RVector::Zero(n);
  gt.pd = RVector::Zero(n);
  gt.labels.assign(shape.voxels(), 0);
  for (std::size_t y = 0; y < shape.height; ++y) {
    const double yn = (static_cast<double>(y) + 0.5) / static_cast<double>(shape.height) * 2.0 - 1.0;
    for (std::size_t x = 0; x < shape.width; ++x) {
      const double xn = (static_cast<double>(x) + 0.5) / static_cast<double>(shape.width) * 2.0 - 1.0;
      const std::size_t i = y * shape.width + x;
      for (std::size_t k = 0; k < spec.size(); ++k) {
        if (!spec[k].contains(xn, yn)) continue;
        gt.labels[i] = static_cast<std::int32_t>(k + 1);
        gt.t1[static_cast<Eigen::Index>(i)] = spec[k].t1_ms;
        gt.t2[static_cast<Eigen::Index>(i)] = spec[k].t2_ms;
        gt.pd[static_cast<Eigen::Index>(i)] = spec[k].pd;
      }
    }
  }
  return gt;
}

CMatrix synthesize_timeseries(const GroundTruth& gt, const SequenceSchedule& schedule,
                              std::size_t k_max) {
  const auto n = static_cast<Eigen::Index>(gt.shape.voxels());
  require(gt.t1.size() == n && gt.t2.size() == n && gt.pd.size() == n, "ground truth is malformed");
  CMatrix series = CMatrix::Zero(n, static_cast<Eigen::Index>(schedule.frames()));
  // one simulation per distinct tissue
  std::map<std::pair<double, double>, CRowVector> cache;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gt.pd[i] == 0.0) continue;
    const auto key = std::make_pair(gt.t1[i], gt.t2[i]);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const CVector f = simulate_fingerprint({gt.t1[i], gt.t2[i]}, schedule, k_max);
      it = cache.emplace(key, f.transpose()).first;
    }
    series.row(i) = gt.pd[i] * it->second;
  }
  return series;
}

ParameterScore score_parameter(const RVector& est, const RVector& truth,
                               const std::vector<std::int32_t>& labels,
                               const std::vector<bool>& mask) {
  require(est.size() == truth.size() && mask.size() == static_cast<std::size_t>(truth.size()) &&
              labels.size() == mask.size(),
          "map shapes do not match");
  ParameterScore s;
  std::size_t count = 0;
  double sq = 0.0, abs_sum = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::map<std::int32_t, std::pair<double, std::size_t>> regions;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto k = static_cast<Eigen::Index>(i);
    const double err = est[k] - truth[k];
    sq += err * err;
    abs_sum += std::abs(err);
    lo = std::min(lo, truth[k]);
    hi = std::max(hi, truth[k]);
    auto& acc = regions[labels[i]];
    acc.first += est[k];
    acc.second += 1;
    ++count;
  }
  require(count > 0, "score mask is empty");
  s.rmse = std::sqrt(sq / static_cast<double>(count));
  s.mae = abs_sum / static_cast<double>(count);
  const double range = hi - lo;
  s.nrmse = range > 0.0 ? s.rmse / range : s.rmse / std::max(std::abs(hi), 1e-300);
  for (const auto& [label, acc] : regions) s.region_means[label] = acc.first / static_cast<double>(acc.second);
  return s;
}

MapScores score_maps(const RVector& est_t1, const RVector& est_t2, const GroundTruth& gt,
                     const std::vector<bool>& mask) {
  MapScores scores;
  scores.t1 = score_parameter(est_t1, gt.t1, gt.labels, mask);
  scores.t2 = score_parameter(est_t2, gt.t2, gt.labels, mask);
  scores.voxels = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  return scores;
}

}  // namespace mrf
