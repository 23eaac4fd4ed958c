#include "mrf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace mrf {

namespace {

constexpr Eigen::Index kEvalChunk = 8192;

double span_or_one(double lo, double hi) { return hi > lo ? hi - lo : 1.0; }

}  // namespace

TargetRanges TargetRanges::from_grid(const DictionaryGrid& grid) {
  TargetRanges r;
  r.t1_min = grid.t1.start;
  r.t1_max = grid.t1.value(grid.t1.count() - 1);
  r.t2_min = grid.t2.start;
  r.t2_max = grid.t2.value(grid.t2.count() - 1);
  return r;
}

void TrainConfig::validate() const {
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise sigma must be non-negative");
  require(augment_factor >= 1, "augment factor must be at least 1");
  require(epochs >= 0, "epochs must be non-negative");
  require(batch_size >= 1, "batch size must be positive");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(plateau_patience >= 1, "plateau patience must be positive");
}

MrfNet make_net(std::size_t rank, const NetShape& shape, const TargetRanges& ranges,
                std::uint64_t seed) {
  require(rank >= 1, "network input width must be positive");
  MrfNet net;
  net.mlp = Mlp::random({static_cast<int>(rank), shape.hidden1, shape.hidden2, 2}, shape.output_relu, seed);
  net.ranges = ranges;
  return net;
}

TrainingSet make_training_set(const Dictionary& dict, const SubspaceBasis& basis,
                              const TrainConfig& cfg) {
  cfg.validate();
  require(dict.size() >= 1, "dictionary is empty");
  require(dict.frames() == basis.frames(), "dictionary and basis disagree on frame count");

  const auto d = static_cast<std::ptrdiff_t>(dict.size());
  const auto copies = static_cast<Eigen::Index>(cfg.augment_factor);
  const Eigen::Index frames = dict.atoms.rows();
  TrainingSet set;
  set.inputs.resize(d * copies, basis.v.cols());
  set.targets.resize(d * copies, 2);
  const CMatrix vt = basis.v.transpose();
  // E||noise||^2 = sigma^2 for a unit-norm atom
  const double component_sigma = cfg.noise_sigma / std::sqrt(2.0 * static_cast<double>(frames));

#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t j = 0; j < d; ++j) {
    CVector atom = dict.atoms.col(j);
    const double norm = atom.norm();
    if (norm > 0.0) atom /= norm;
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.seed >> 32), static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector noisy(frames);
    for (Eigen::Index r = 0; r < copies; ++r) {
      if (cfg.noise_sigma > 0.0) {
        for (Eigen::Index t = 0; t < frames; ++t) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          noisy[t] = atom[t] + component_sigma * Complex(re, im);
        }
      } else {
        noisy = atom;
      }
      const CVector coeffs = vt * noisy;
      RVector aligned = phase_align(coeffs);
      const double an = aligned.norm();
      if (an > 0.0) aligned /= an;
      const Eigen::Index row = j * copies + r;
      set.inputs.row(row) = aligned.transpose();
      set.targets(row, 0) = dict.labels[static_cast<std::size_t>(j)].t1_ms;
      set.targets(row, 1) = dict.labels[static_cast<std::size_t>(j)].t2_ms;
    }
  }
  return set;
}

namespace {

RMatrix normalized_targets(const RMatrix& targets_ms, const TargetRanges& r) {
  RMatrix out(2, targets_ms.rows());
  out.row(0) = ((targets_ms.col(0).array() - r.t1_min) / span_or_one(r.t1_min, r.t1_max)).matrix().transpose();
  out.row(1) = ((targets_ms.col(1).array() - r.t2_min) / span_or_one(r.t2_min, r.t2_max)).matrix().transpose();
  return out;
}

double full_loss(const Mlp& mlp, const RMatrix& inputs_t, const RMatrix& targets_t) {
  double sum = 0.0;
  const Eigen::Index n = inputs_t.cols();
  for (Eigen::Index first = 0; first < n; first += kEvalChunk) {
    const Eigen::Index b = std::min(kEvalChunk, n - first);
    const RMatrix out = mlp.forward(inputs_t.middleCols(first, b));
    sum += (out - targets_t.middleCols(first, b)).squaredNorm();
  }
  return sum / static_cast<double>(targets_t.size());
}

}  // namespace

MrfNet train(MrfNet net, const TrainingSet& data, const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  const Eigen::Index n = data.inputs.rows();
  require(n >= 1, "training set is empty");
  require(data.inputs.cols() == net.input_width(), "training inputs do not match the network");
  require(data.targets.rows() == n && data.targets.cols() == 2, "training targets must be N x 2");

  const RMatrix inputs_t = data.inputs.transpose();
  const RMatrix targets_t = normalized_targets(data.targets, net.ranges);

  TrainReport local;
  TrainReport& rep = report != nullptr ? *report : local;
  rep = {};
  rep.initial_loss = full_loss(net.mlp, inputs_t, targets_t);
  net.train_config = cfg;
  if (cfg.epochs == 0) {
    rep.final_loss = rep.initial_loss;
    return net;
  }

  auto& layers = net.mlp.layers();
  std::vector<DenseLayer> velocity(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    velocity[i].weight = RMatrix::Zero(layers[i].weight.rows(), layers[i].weight.cols());
    velocity[i].bias = RVector::Zero(layers[i].bias.size());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const auto batch = static_cast<Eigen::Index>(cfg.batch_size);
  RMatrix xb(inputs_t.rows(), batch), yb(2, batch);
  std::vector<DenseLayer> grads;
  double lr = cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (Eigen::Index first = 0; first < n; first += batch) {
      const Eigen::Index b = std::min(batch, n - first);
      xb.resize(inputs_t.rows(), b);
      yb.resize(2, b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(first + k)];
        xb.col(k) = inputs_t.col(src);
        yb.col(k) = targets_t.col(src);
      }
      const double batch_loss = net.mlp.loss_and_gradient(xb, yb, &grads);
      epoch_sum += batch_loss * static_cast<double>(b);
      for (std::size_t i = 0; i < layers.size(); ++i) {
        velocity[i].weight = cfg.momentum * velocity[i].weight - lr * grads[i].weight;
        velocity[i].bias = cfg.momentum * velocity[i].bias - lr * grads[i].bias;
        layers[i].weight += velocity[i].weight;
        layers[i].bias += velocity[i].bias;
      }
    }
    const double epoch_loss = epoch_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss) || !net.mlp.all_finite()) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    }
    rep.epoch_losses.push_back(epoch_loss);
    rep.epoch_learning_rates.push_back(lr);
    if (epoch_loss < best * (1.0 - 1e-3)) {
      best = epoch_loss;
      since_best = 0;
    } else if (++since_best >= cfg.plateau_patience) {
      lr *= 0.5;
      since_best = 0;
    }
  }
  rep.final_loss = full_loss(net.mlp, inputs_t, targets_t);
  return net;
}

std::vector<bool> foreground_mask(const RMatrix& aligned) {
  const RVector norms = aligned.rowwise().norm();
  const double peak = norms.size() > 0 ? norms.maxCoeff() : 0.0;
  std::vector<bool> fg(static_cast<std::size_t>(aligned.rows()), false);
  if (peak <= 0.0) return fg;
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    fg[static_cast<std::size_t>(i)] = norms[i] > 0.0 && norms[i] >= kBackgroundFraction * peak;
  }
  return fg;
}

ParameterMaps infer(const MrfNet& net, const RMatrix& aligned) {
  require(aligned.cols() == net.input_width(), "voxel width does not match the network");
  require(aligned.allFinite(), "voxel coefficients must be finite");
  const std::vector<bool> fg = foreground_mask(aligned);
  const Eigen::Index n = aligned.rows();
  ParameterMaps maps;
  maps.t1_t2 = RMatrix::Zero(n, 2);

  RMatrix normalized = aligned.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = normalized.col(i).norm();
    if (norm > 0.0) normalized.col(i) /= norm;
  }
  const TargetRanges& r = net.ranges;
  for (Eigen::Index first = 0; first < n; first += kEvalChunk) {
    const Eigen::Index b = std::min(kEvalChunk, n - first);
    const RMatrix out = net.mlp.forward(normalized.middleCols(first, b));
    for (Eigen::Index k = 0; k < b; ++k) {
      const Eigen::Index i = first + k;
      if (!fg[static_cast<std::size_t>(i)]) continue;
      const double t1 = r.t1_min + out(0, k) * span_or_one(r.t1_min, r.t1_max);
      const double t2 = r.t2_min + out(1, k) * span_or_one(r.t2_min, r.t2_max);
      maps.t1_t2(i, 0) = std::clamp(t1, r.t1_min, r.t1_max);
      maps.t1_t2(i, 1) = std::clamp(t2, r.t2_min, r.t2_max);
    }
  }
  return maps;
}

MatchTemplates MatchTemplates::build(const Dictionary& dict, const SubspaceBasis& basis) {
  require(dict.frames() == basis.frames(), "dictionary and basis disagree on frame count");
  MatchTemplates t;
  t.aligned = phase_align_rows(dict.atoms.transpose() * basis.v);
  t.norms = t.aligned.rowwise().norm();
  t.labels = dict.labels;
  return t;
}

MatchResult dictionary_match(const RMatrix& aligned, const MatchTemplates& templates) {
  require(aligned.cols() == templates.aligned.cols(), "voxel width does not match the templates");
  require(!templates.labels.empty(), "template set is empty");
  const Eigen::Index n = aligned.rows();
  const std::vector<bool> fg = foreground_mask(aligned);

  RMatrix unit = templates.aligned;
  for (Eigen::Index j = 0; j < unit.rows(); ++j) {
    if (templates.norms[j] > 0.0) unit.row(j) /= templates.norms[j];
  }

  MatchResult result;
  result.maps.t1_t2 = RMatrix::Zero(n, 2);
  result.maps.proton_density = RVector::Zero(n);
  result.atom_index.assign(static_cast<std::size_t>(n), -1);

  constexpr Eigen::Index chunk = 512;
  for (Eigen::Index first = 0; first < n; first += chunk) {
    const Eigen::Index b = std::min(chunk, n - first);
    RMatrix voxels = aligned.middleRows(first, b).transpose();
    for (Eigen::Index k = 0; k < b; ++k) {
      const double norm = voxels.col(k).norm();
      if (norm > 0.0) voxels.col(k) /= norm;
    }
    const RMatrix scores = unit * voxels;  // d x b
    for (Eigen::Index k = 0; k < b; ++k) {
      const Eigen::Index i = first + k;
      if (!fg[static_cast<std::size_t>(i)]) continue;
      Eigen::Index best = 0;
      scores.col(k).maxCoeff(&best);
      const auto& label = templates.labels[static_cast<std::size_t>(best)];
      result.atom_index[static_cast<std::size_t>(i)] = best;
      result.maps.t1_t2(i, 0) = label.t1_ms;
      result.maps.t1_t2(i, 1) = label.t2_ms;
      const double tn = templates.norms[best];
      result.maps.proton_density[i] =
          tn > 0.0 ? aligned.row(i).dot(templates.aligned.row(best)) / (tn * tn) : 0.0;
    }
  }
  return result;
}

MatchResult dictionary_match(const RMatrix& aligned, const Dictionary& dict,
                             const SubspaceBasis& basis) {
  return dictionary_match(aligned, MatchTemplates::build(dict, basis));
}

}  // namespace mrf
