#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrf/types.hpp"

namespace mrf {

/// Inversion-prepared FISP acquisition: one excitation per frame.
struct SequenceSchedule {
  std::vector<double> flip_angles_deg;
  double tr_ms = 10.0;
  double te_ms = 1.908;
  double tinv_ms = 18.0;
  bool inversion = true;

  [[nodiscard]] std::size_t frames() const { return flip_angles_deg.size(); }

  /// Throws std::invalid_argument when timings or flip angles are out of range.
  void validate() const;
};

/// Flip-angle train alpha_t = max_flip * |sin(pi * t / period)|, t = 1..L.
struct SinusoidConfig {
  double max_flip_deg = 70.0;
  double period_frames = 250.0;
};

SequenceSchedule default_schedule(std::size_t frames, const SinusoidConfig& sinusoid = {});

struct TissueParams {
  double t1_ms = 0.0;
  double t2_ms = 0.0;

  friend bool operator==(const TissueParams&, const TissueParams&) = default;
};

/// Default number of retained configuration orders, min(L, 100).
std::size_t default_k_max(std::size_t frames);

/// Extended-phase-graph simulation of the transverse F0 state sampled at TE
/// after every excitation. RF pulses are instantaneous about x (phase 0) and
/// the crusher advances configuration order by one per TR. Orders at or
/// above `k_max` are discarded.
CVector simulate_fingerprint(const TissueParams& tissue, const SequenceSchedule& schedule,
                             std::size_t k_max);

/// Inclusive arithmetic range start:step:stop.
struct GridRange {
  double start = 0.0;
  double step = 1.0;
  double stop = 0.0;

  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] double value(std::size_t i) const { return start + step * static_cast<double>(i); }

  /// Parses "a:step:b".
  static GridRange parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  void validate() const;
};

struct DictionaryGrid {
  GridRange t1;
  GridRange t2;

  /// Grid pairs in T1-major, T2-minor order, minus excluded pairs.
  [[nodiscard]] std::vector<TissueParams> pairs(
      const std::function<bool(const TissueParams&)>& exclude = {}) const;
};

/// Returns true for pairs that should be dropped from the dictionary.
using PairExclusion = std::function<bool(const TissueParams&)>;

struct Dictionary {
  CMatrix atoms;  ///< L x d raw fingerprints
  std::vector<TissueParams> labels;
  DictionaryGrid grid;
  SequenceSchedule schedule;

  [[nodiscard]] std::size_t frames() const { return static_cast<std::size_t>(atoms.rows()); }
  [[nodiscard]] std::size_t size() const { return labels.size(); }

  /// Copy of the atoms with every column scaled to unit L2 norm.
  [[nodiscard]] CMatrix normalized_atoms() const;
};

Dictionary build_dictionary(const DictionaryGrid& grid, const SequenceSchedule& schedule,
                            std::size_t k_max, const PairExclusion& exclude = {});

inline Dictionary build_dictionary(const DictionaryGrid& grid, const SequenceSchedule& schedule) {
  return build_dictionary(grid, schedule, default_k_max(schedule.frames()));
}

/// Simulates the grid block by block without holding the whole dictionary.
/// `consume` receives an L x b block and the b labels of its columns, in
/// dictionary order.
void stream_dictionary(const DictionaryGrid& grid, const SequenceSchedule& schedule,
                       std::size_t k_max, std::size_t block_atoms,
                       const std::function<void(const CMatrix&, std::span<const TissueParams>)>& consume,
                       const PairExclusion& exclude = {});

}  // namespace mrf
