#include <gtest/gtest.h>

#include <random>

#include "mrf/inference.hpp"
#include "mrf/mlp.hpp"
#include "oracles.hpp"

using namespace mrf;

namespace {

RMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

// Reference forward pass written directly from the layer definition.
RMatrix reference_forward(const Mlp& net, const RMatrix& x) {
  RMatrix a = x;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    RMatrix z = layers[l].weight * a;
    z.colwise() += layers[l].bias;
    const bool relu = l + 1 < layers.size() || net.output_relu();
    a = relu ? RMatrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double fd_rel_error(bool output_relu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mlp net = Mlp::random({4, 7, 6, 2}, output_relu, seed);
  // nonzero biases so every term of the gradient is exercised
  for (auto& layer : net.layers()) layer.bias = oracle::random_real(layer.bias.size(), rng) * 0.3;
  const RMatrix x = random_matrix(4, 5, rng);
  RMatrix t = random_matrix(2, 5, rng);
  if (output_relu) t = t.cwiseAbs();
  std::vector<DenseLayer> grads;
  net.loss_and_gradient(x, t, &grads);

  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto check = [&](double& param, double analytic, double& num_sq, double& err_sq) {
      const double saved = param;
      param = saved + h;
      const double up = net.loss(x, t);
      param = saved - h;
      const double down = net.loss(x, t);
      param = saved;
      const double fd = (up - down) / (2.0 * h);
      num_sq += fd * fd;
      err_sq += (fd - analytic) * (fd - analytic);
    };
    double ref = 0.0, err = 0.0;
    auto& w = net.layers()[l].weight;
    for (Eigen::Index i = 0; i < w.size(); ++i) check(w.data()[i], grads[l].weight.data()[i], ref, err);
    worst = std::max(worst, std::sqrt(err / ref));
    ref = err = 0.0;
    auto& b = net.layers()[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) check(b[i], grads[l].bias[i], ref, err);
    worst = std::max(worst, std::sqrt(err / std::max(ref, 1e-300)));
  }
  return worst;
}

}  // namespace

TEST(Mlp, ShapesAndInitialization) {
  const Mlp net = Mlp::random({5, 300, 300, 2}, false, 3);
  ASSERT_EQ(net.layers().size(), 3u);
  EXPECT_EQ(net.input_width(), 5);
  EXPECT_EQ(net.output_width(), 2);
  EXPECT_EQ(net.layers()[1].weight.rows(), 300);
  EXPECT_EQ(net.layers()[1].weight.cols(), 300);
  EXPECT_EQ(net.layers()[2].bias.norm(), 0.0);
  // He-normal: variance 2 / fan_in
  const RMatrix& w = net.layers()[1].weight;
  const double var = w.squaredNorm() / static_cast<double>(w.size());
  EXPECT_NEAR(var, 2.0 / 300.0, 0.05 * 2.0 / 300.0);
  EXPECT_EQ(Mlp::random({5, 8, 2}, false, 3).layers()[0].weight, Mlp::random({5, 8, 2}, false, 3).layers()[0].weight);
}

TEST(Mlp, ForwardMatchesReference) {
  std::mt19937_64 rng(4);
  for (bool relu : {false, true}) {
    const Mlp net = Mlp::random({3, 10, 9, 2}, relu, 5);
    const RMatrix x = random_matrix(3, 17, rng);
    EXPECT_LT((net.forward(x) - reference_forward(net, x)).norm(), 1e-12);
  }
}

TEST(Mlp, LossIsMeanSquaredError) {
  std::mt19937_64 rng(6);
  const Mlp net = Mlp::random({3, 4, 2}, false, 7);
  const RMatrix x = random_matrix(3, 6, rng), t = random_matrix(2, 6, rng);
  const double expected = (reference_forward(net, x) - t).squaredNorm() / 12.0;
  EXPECT_NEAR(net.loss(x, t), expected, 1e-14);
  std::vector<DenseLayer> g;
  EXPECT_NEAR(net.loss_and_gradient(x, t, &g), expected, 1e-14);
}

TEST(Mlp, BackpropMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EXPECT_LT(fd_rel_error(false, seed), 1e-4);
    EXPECT_LT(fd_rel_error(true, seed), 1e-4);
  }
}

TEST(Mlp, RejectsInconsistentLayers) {
  std::vector<DenseLayer> layers(2);
  layers[0].weight = RMatrix::Zero(4, 3);
  layers[0].bias = RVector::Zero(4);
  layers[1].weight = RMatrix::Zero(2, 5);
  layers[1].bias = RVector::Zero(2);
  EXPECT_THROW(Mlp(layers, false), std::invalid_argument);
}

TEST(Training, ZeroEpochsLeavesWeightsUnchanged) {
  std::mt19937_64 rng(8);
  const MrfNet net = make_net(3, {16, 16, false}, {}, 9);
  TrainingSet set{random_matrix(20, 3, rng), random_matrix(20, 2, rng).cwiseAbs()};
  TrainConfig cfg;
  cfg.epochs = 0;
  TrainReport rep;
  const MrfNet out = train(net, set, cfg, &rep);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(out.mlp.layers()[l].weight, net.mlp.layers()[l].weight);
  EXPECT_EQ(rep.initial_loss, rep.final_loss);
}

TEST(Training, FitsSmallTable) {
  std::mt19937_64 rng(10);
  RMatrix inputs = random_matrix(9, 3, rng);
  for (Eigen::Index i = 0; i < 9; ++i) inputs.row(i).normalize();
  RMatrix targets(9, 2);
  for (Eigen::Index i = 0; i < 9; ++i) {
    targets(i, 0) = static_cast<double>(i % 3) / 2.0;
    targets(i, 1) = static_cast<double>(i / 3) / 2.0;
  }
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.batch_size = 9;
  cfg.learning_rate = 0.05;
  cfg.plateau_patience = 200;
  TrainReport rep;
  const MrfNet net = train(make_net(3, {32, 32, false}, {}, 11), {inputs, targets}, cfg, &rep);
  EXPECT_LT(rep.final_loss, 1e-4);
  EXPECT_LT(rep.final_loss, rep.initial_loss);
  EXPECT_EQ(rep.epoch_losses.size(), 5000u);
  EXPECT_LT(net.mlp.loss(inputs.transpose(), targets.transpose()), 1e-4);
}

TEST(Training, PlateauHalvesLearningRate) {
  std::mt19937_64 rng(12);
  // a vanishing step cannot improve the loss, so every epoch is a plateau
  TrainingSet set{random_matrix(64, 3, rng), random_matrix(64, 2, rng).cwiseAbs()};
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-12;
  cfg.plateau_patience = 1;
  TrainReport rep;
  (void)train(make_net(3, {4, 4, false}, {}, 13), set, cfg, &rep);
  EXPECT_LT(rep.epoch_learning_rates.back(), rep.epoch_learning_rates.front());
  for (std::size_t i = 1; i < rep.epoch_learning_rates.size(); ++i) {
    const double ratio = rep.epoch_learning_rates[i] / rep.epoch_learning_rates[i - 1];
    EXPECT_TRUE(ratio == 1.0 || ratio == 0.5);
  }
}

TEST(Training, DivergenceIsReported) {
  std::mt19937_64 rng(14);
  TrainingSet set{random_matrix(32, 3, rng) * 1e200, random_matrix(32, 2, rng)};
  TrainConfig cfg;
  cfg.epochs = 3;
  EXPECT_THROW((void)train(make_net(3, {16, 16, false}, {}, 15), set, cfg), NumericalError);
}
