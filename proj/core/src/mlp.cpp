#include "mrf/mlp.hpp"

#include <cmath>
#include <random>

namespace mrf {

Mlp::Mlp(std::vector<DenseLayer> layers, bool output_relu)
    : layers_(std::move(layers)), output_relu_(output_relu) {
  require(!layers_.empty(), "network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    require(layers_[i].bias.size() == layers_[i].weight.rows(), "bias does not match layer width");
    if (i > 0) {
      require(layers_[i].weight.cols() == layers_[i - 1].weight.rows(), "layer widths do not chain");
    }
  }
}

Mlp Mlp::random(const std::vector<int>& widths, bool output_relu, std::uint64_t seed) {
  require(widths.size() >= 2, "network needs an input and an output width");
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    require(widths[i] >= 1 && widths[i + 1] >= 1, "layer widths must be positive");
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / widths[i]));
    DenseLayer layer;
    layer.weight.resize(widths[i + 1], widths[i]);
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = gauss(rng);
    layer.bias = RVector::Zero(widths[i + 1]);
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers), output_relu);
}

int Mlp::input_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_width() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

RMatrix Mlp::forward(const RMatrix& inputs) const {
  require(inputs.rows() == input_width(), "input width does not match the network");
  RMatrix a = inputs;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    RMatrix z = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    const bool relu = i + 1 < layers_.size() || output_relu_;
    a = relu ? RMatrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

double Mlp::loss(const RMatrix& inputs, const RMatrix& targets) const {
  require(targets.rows() == output_width() && targets.cols() == inputs.cols(),
          "targets do not match the batch");
  return (forward(inputs) - targets).squaredNorm() / static_cast<double>(targets.size());
}

double Mlp::loss_and_gradient(const RMatrix& inputs, const RMatrix& targets,
                              std::vector<DenseLayer>* grads) const {
  require(inputs.rows() == input_width(), "input width does not match the network");
  require(targets.rows() == output_width() && targets.cols() == inputs.cols(),
          "targets do not match the batch");
  const std::size_t depth = layers_.size();
  std::vector<RMatrix> activations(depth + 1);  // activations[0] = inputs
  std::vector<RMatrix> pre(depth);
  activations[0] = inputs;
  for (std::size_t i = 0; i < depth; ++i) {
    pre[i] = layers_[i].weight * activations[i];
    pre[i].colwise() += layers_[i].bias;
    const bool relu = i + 1 < depth || output_relu_;
    activations[i + 1] = relu ? RMatrix(pre[i].cwiseMax(0.0)) : pre[i];
  }
  const RMatrix residual = activations[depth] - targets;
  const double scale = 1.0 / static_cast<double>(targets.size());
  const double value = residual.squaredNorm() * scale;
  if (grads == nullptr) return value;

  grads->resize(depth);
  RMatrix delta = 2.0 * scale * residual;
  for (std::size_t step = 0; step < depth; ++step) {
    const std::size_t i = depth - 1 - step;
    const bool relu = i + 1 < depth || output_relu_;
    if (relu) delta = delta.cwiseProduct((pre[i].array() > 0.0).cast<double>().matrix());
    (*grads)[i].weight = delta * activations[i].transpose();
    (*grads)[i].bias = delta.rowwise().sum();
    if (i > 0) delta = layers_[i].weight.transpose() * delta;
  }
  return value;
}

}  // namespace mrf
