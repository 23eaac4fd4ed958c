#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrf/artifacts.hpp"
#include "mrf/config.hpp"
#include "mrf/inference.hpp"
#include "mrf/phantom.hpp"
#include "mrf/solver.hpp"

namespace mrf {

struct AcquisitionParams {
  DensityParams density;
  std::size_t coils = 4;
  CoilKind coil_kind = CoilKind::gaussian_ring;
  double kspace_noise = 0.0;  ///< per real/imaginary component on sampled entries
  std::uint64_t seed = 0;
};

/// Synthesizes the phantom series, applies the forward operator and adds
/// seeded complex Gaussian noise to the sampled entries.
Acquisition simulate_acquisition(const GroundTruth& gt, const SequenceSchedule& schedule,
                                 std::size_t k_max, const AcquisitionParams& params);

struct MethodResult {
  ReconMode mode = ReconMode::bpi;
  SolveResult solve;
  ParameterMaps net_maps;
  MatchResult match;
  MapScores net_scores;
  MapScores match_scores;
};

struct ExperimentResult {
  GroundTruth gt;
  SubspaceBasis basis;
  TrainReport train_report;
  std::vector<MethodResult> methods;  ///< bpi, lr, lrtv

  [[nodiscard]] const MethodResult& method(ReconMode mode) const;
};

/// method,parameter,metric,value rows for {bpi, lr, lrtv} x {T1, T2} x {RMSE, MAE, NRMSE}.
void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, MapScores>>& rows);

/// Runs the three-way comparison. When `out_dir` is non-empty every
/// artifact, metrics table, trace and preview is written there. Progress
/// goes to `log` when given.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                std::ostream* log = nullptr);

}  // namespace mrf
