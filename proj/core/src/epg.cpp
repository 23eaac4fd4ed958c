#include "mrf/epg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mrf/parallel.hpp"

namespace mrf {

void SequenceSchedule::validate() const {
  require(!flip_angles_deg.empty(), "schedule has no frames");
  for (double a : flip_angles_deg) {
    require(std::isfinite(a) && a >= 0.0 && a <= 180.0, "flip angles must lie in [0, 180] degrees");
  }
  require(std::isfinite(tr_ms) && std::isfinite(te_ms) && std::isfinite(tinv_ms),
          "schedule timings must be finite");
  require(te_ms > 0.0 && tr_ms > te_ms, "schedule requires TR > TE > 0");
  require(tinv_ms >= 0.0, "inversion time must be non-negative");
}

SequenceSchedule default_schedule(std::size_t frames, const SinusoidConfig& sinusoid) {
  require(frames >= 1, "schedule needs at least one frame");
  require(sinusoid.period_frames > 0.0, "sinusoid period must be positive");
  SequenceSchedule s;
  s.flip_angles_deg.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const double phase = std::numbers::pi * static_cast<double>(t + 1) / sinusoid.period_frames;
    s.flip_angles_deg[t] = sinusoid.max_flip_deg * std::abs(std::sin(phase));
  }
  s.validate();
  return s;
}

std::size_t default_k_max(std::size_t frames) { return std::min<std::size_t>(frames, 100); }

CVector simulate_fingerprint(const TissueParams& tissue, const SequenceSchedule& schedule,
                             std::size_t k_max) {
  require(k_max >= 1, "k_max must be at least 1");
  require(std::isfinite(tissue.t1_ms) && std::isfinite(tissue.t2_ms) && tissue.t1_ms > 0.0 &&
              tissue.t2_ms > 0.0,
          "tissue parameters must be finite and positive");
  schedule.validate();

  const std::size_t frames = schedule.frames();
  const std::size_t k = std::min(k_max, frames);

  // configuration states for orders 0..k-1; fm[0] mirrors conj(fp[0])
  std::vector<Complex> fp(k), fm(k), z(k);
  z[0] = 1.0;
  if (schedule.inversion) {
    const double e1_inv = std::exp(-schedule.tinv_ms / tissue.t1_ms);
    z[0] = -1.0 * e1_inv + (1.0 - e1_inv);
  }

  const double e1_te = std::exp(-schedule.te_ms / tissue.t1_ms);
  const double e2_te = std::exp(-schedule.te_ms / tissue.t2_ms);
  const double rest = schedule.tr_ms - schedule.te_ms;
  const double e1_rest = std::exp(-rest / tissue.t1_ms);
  const double e2_rest = std::exp(-rest / tissue.t2_ms);

  CVector signal(static_cast<Eigen::Index>(frames));
  constexpr Complex i_unit{0.0, 1.0};

  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t active = std::min(t + 1, k);
    const double alpha = schedule.flip_angles_deg[t] * std::numbers::pi / 180.0;
    const double c2 = std::cos(alpha / 2.0) * std::cos(alpha / 2.0);
    const double s2 = std::sin(alpha / 2.0) * std::sin(alpha / 2.0);
    const double sa = std::sin(alpha);
    const double ca = std::cos(alpha);

    for (std::size_t j = 0; j < active; ++j) {
      const Complex p = fp[j], m = fm[j], l = z[j];
      fp[j] = c2 * p + s2 * m - i_unit * sa * l;
      fm[j] = s2 * p + c2 * m + i_unit * sa * l;
      z[j] = -0.5 * i_unit * sa * p + 0.5 * i_unit * sa * m + ca * l;
    }

    for (std::size_t j = 0; j < active; ++j) {
      fp[j] *= e2_te;
      fm[j] *= e2_te;
      z[j] *= e1_te;
    }
    z[0] += 1.0 - e1_te;

    signal[static_cast<Eigen::Index>(t)] = fp[0];

    for (std::size_t j = 0; j < active; ++j) {
      fp[j] *= e2_rest;
      fm[j] *= e2_rest;
      z[j] *= e1_rest;
    }
    z[0] += 1.0 - e1_rest;

    // crusher: F+ orders move up, F- orders move down
    const std::size_t top = std::min(active + 1, k);
    for (std::size_t j = top - 1; j >= 1; --j) fp[j] = fp[j - 1];
    for (std::size_t j = 0; j + 1 < top; ++j) fm[j] = fm[j + 1];
    if (top == active) fm[top - 1] = 0.0;
    fp[0] = std::conj(fm[0]);
  }
  return signal;
}

std::size_t GridRange::count() const {
  validate();
  // tolerate representation error of decimal steps at the inclusive end
  const double span = (stop - start) / step;
  return static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
}

void GridRange::validate() const {
  require(std::isfinite(start) && std::isfinite(step) && std::isfinite(stop),
          "grid range must be finite");
  require(start > 0.0, "grid range must be positive");
  require(step > 0.0, "grid step must be positive");
  require(stop >= start, "grid range is empty");
}

GridRange GridRange::parse(std::string_view text) {
  std::vector<double> parts;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = std::min(text.find(':', begin), text.size());
    const std::string piece(text.substr(begin, end - begin));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == piece.size() && !piece.empty(), "malformed range '" + std::string(text) + "'");
    parts.push_back(v);
    begin = end + 1;
  }
  require(parts.size() == 3, "range must have the form start:step:stop");
  GridRange r{parts[0], parts[1], parts[2]};
  r.validate();
  return r;
}

std::string GridRange::to_string() const {
  std::ostringstream os;
  os << start << ':' << step << ':' << stop;
  return os.str();
}

std::vector<TissueParams> DictionaryGrid::pairs(const PairExclusion& exclude) const {
  const std::size_t n1 = t1.count();
  const std::size_t n2 = t2.count();
  std::vector<TissueParams> out;
  out.reserve(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const TissueParams p{t1.value(i), t2.value(j)};
      if (exclude && exclude(p)) continue;
      out.push_back(p);
    }
  }
  return out;
}

CMatrix Dictionary::normalized_atoms() const {
  CMatrix out = atoms;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

namespace {

void simulate_columns(std::span<const TissueParams> labels, const SequenceSchedule& schedule,
                      std::size_t k_max, CMatrix& out) {
  configure_threads();
  const auto count = static_cast<std::ptrdiff_t>(labels.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    out.col(j) = simulate_fingerprint(labels[static_cast<std::size_t>(j)], schedule, k_max);
  }
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (!out.col(j).allFinite()) throw NumericalError("non-finite fingerprint in dictionary");
  }
}

}  // namespace

Dictionary build_dictionary(const DictionaryGrid& grid, const SequenceSchedule& schedule,
                            std::size_t k_max, const PairExclusion& exclude) {
  schedule.validate();
  Dictionary dict;
  dict.grid = grid;
  dict.schedule = schedule;
  dict.labels = grid.pairs(exclude);
  require(!dict.labels.empty(), "dictionary grid is empty after exclusion");
  dict.atoms.resize(static_cast<Eigen::Index>(schedule.frames()),
                    static_cast<Eigen::Index>(dict.labels.size()));
  simulate_columns(dict.labels, schedule, k_max, dict.atoms);
  return dict;
}

void stream_dictionary(const DictionaryGrid& grid, const SequenceSchedule& schedule,
                       std::size_t k_max, std::size_t block_atoms,
                       const std::function<void(const CMatrix&, std::span<const TissueParams>)>& consume,
                       const PairExclusion& exclude) {
  require(block_atoms >= 1, "block size must be positive");
  schedule.validate();
  const std::vector<TissueParams> labels = grid.pairs(exclude);
  require(!labels.empty(), "dictionary grid is empty after exclusion");
  CMatrix block;
  for (std::size_t first = 0; first < labels.size(); first += block_atoms) {
    const std::size_t b = std::min(block_atoms, labels.size() - first);
    const std::span<const TissueParams> chunk(labels.data() + first, b);
    block.resize(static_cast<Eigen::Index>(schedule.frames()), static_cast<Eigen::Index>(b));
    simulate_columns(chunk, schedule, k_max, block);
    consume(block, chunk);
  }
}

}  // namespace mrf
