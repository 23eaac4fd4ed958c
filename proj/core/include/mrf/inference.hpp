#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mrf/epg.hpp"
#include "mrf/mlp.hpp"
#include "mrf/subspace.hpp"

namespace mrf {

/// Per-parameter [min, max] used to scale targets to [0, 1].
struct TargetRanges {
  double t1_min = 0.0, t1_max = 1.0;
  double t2_min = 0.0, t2_max = 1.0;

  static TargetRanges from_grid(const DictionaryGrid& grid);
};

struct TrainConfig {
  double noise_sigma = 0.01;  ///< rms norm of the complex noise added to unit-norm atoms
  std::size_t augment_factor = 100;
  int epochs = 30;
  std::size_t batch_size = 128;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int plateau_patience = 2;  ///< epochs without improvement before halving lr
  std::uint64_t seed = 1;

  void validate() const;
};

struct NetShape {
  int hidden1 = 300;
  int hidden2 = 300;
  bool output_relu = false;
};

/// MRF-Net: S -> H1 -> H2 -> 2 regression from aligned, L2-normalized
/// subspace coefficients to (T1, T2) in milliseconds.
struct MrfNet {
  Mlp mlp;
  TargetRanges ranges;
  TrainConfig train_config;

  [[nodiscard]] int input_width() const { return mlp.input_width(); }
};

MrfNet make_net(std::size_t rank, const NetShape& shape, const TargetRanges& ranges,
                std::uint64_t seed);

struct TrainingSet {
  RMatrix inputs;   ///< N x S, unit rows
  RMatrix targets;  ///< N x 2, (T1, T2) in ms
};

/// Noisy copies of every unit-normalized atom, projected, phase aligned and
/// normalized. Row order: atom-major, copy-minor.
TrainingSet make_training_set(const Dictionary& dict, const SubspaceBasis& basis,
                              const TrainConfig& cfg);

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
  std::vector<double> epoch_learning_rates;
};

/// Minibatch SGD with momentum on normalized-target MSE. Throws
/// NumericalError naming the epoch if the loss diverges.
MrfNet train(MrfNet net, const TrainingSet& data, const TrainConfig& cfg,
             TrainReport* report = nullptr);

/// Voxels with coefficient norm below this fraction of the stack maximum are
/// treated as background.
inline constexpr double kBackgroundFraction = 1e-3;

/// Foreground flags for an aligned n x S stack.
std::vector<bool> foreground_mask(const RMatrix& aligned);

/// Parameter maps, n x 2 (T1, T2 in ms). Background voxels are 0.
struct ParameterMaps {
  RMatrix t1_t2;
  RVector proton_density;  ///< empty for the network
};

ParameterMaps infer(const MrfNet& net, const RMatrix& aligned);

/// Subspace templates of a dictionary: aligned projections of its atoms.
struct MatchTemplates {
  RMatrix aligned;       ///< d x S
  RVector norms;         ///< row norms of `aligned`
  std::vector<TissueParams> labels;

  static MatchTemplates build(const Dictionary& dict, const SubspaceBasis& basis);
};

struct MatchResult {
  ParameterMaps maps;
  std::vector<std::ptrdiff_t> atom_index;  ///< -1 for background
};

/// Exhaustive maximum-inner-product matching against every template.
MatchResult dictionary_match(const RMatrix& aligned, const MatchTemplates& templates);
MatchResult dictionary_match(const RMatrix& aligned, const Dictionary& dict,
                             const SubspaceBasis& basis);

}  // namespace mrf
