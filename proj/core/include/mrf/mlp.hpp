#pragma once

#include <cstdint>
#include <vector>

#include "mrf/types.hpp"

namespace mrf {

/// Affine layer y = W x + b, W is out x in.
struct DenseLayer {
  RMatrix weight;
  RVector bias;
};

/// Fully connected network with ReLU on every hidden layer and an optional
/// ReLU on the output. Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, bool output_relu);

  /// He-normal weights, zero biases.
  static Mlp random(const std::vector<int>& widths, bool output_relu, std::uint64_t seed);

  [[nodiscard]] RMatrix forward(const RMatrix& inputs) const;

  /// Mean squared error 1 / (N * out) * sum (f(x) - t)^2 and its gradient
  /// with respect to every layer, stored in the same shape as the layers.
  double loss_and_gradient(const RMatrix& inputs, const RMatrix& targets,
                           std::vector<DenseLayer>* grads) const;
  [[nodiscard]] double loss(const RMatrix& inputs, const RMatrix& targets) const;

  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }
  [[nodiscard]] bool output_relu() const { return output_relu_; }
  [[nodiscard]] int input_width() const;
  [[nodiscard]] int output_width() const;
  [[nodiscard]] bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
  bool output_relu_ = false;
};

}  // namespace mrf
