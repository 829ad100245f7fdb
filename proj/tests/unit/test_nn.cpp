#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "sdae/error.hpp"
#include "sdae/nn.hpp"

using namespace sdae;
using testing_support::random_vector;

namespace {

double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

DenseLayer layer(Matrix w, Vector b, Activation a) { return {std::move(w), std::move(b), a}; }

// Worst relative error between backprop and central differences of the
// oracle loss, over every parameter of `net`.
double gradient_error(std::vector<DenseLayer> net, const Vector& x, const Target& target,
                      Loss loss) {
  const Gradients g = backprop(net, x, target, loss);
  const oracle::Vec ox = testing_support::vec(x);
  auto f = [&] {
    const auto out = oracle::forward(testing_support::net(net), ox);
    switch (loss) {
      case Loss::SoftmaxNll: return oracle::nll(out, std::get<std::size_t>(target));
      case Loss::CrossEntropyRecon:
        return oracle::cross_entropy(testing_support::vec(std::get<Vector>(target)), out);
      case Loss::SquaredErrorRecon:
        return oracle::squared_error(testing_support::vec(std::get<Vector>(target)), out);
    }
    return 0.0;
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.size(); ++l) {
    auto w = net[l].weights.span();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double fd = oracle::central_diff(&w[i], f);
      worst = std::max(worst, oracle::rel_err(g.layers[l].weights.span()[i], fd));
    }
    for (std::size_t i = 0; i < net[l].bias.size(); ++i) {
      const double fd = oracle::central_diff(&net[l].bias[i], f);
      worst = std::max(worst, oracle::rel_err(g.layers[l].bias[i], fd));
    }
  }
  return worst;
}

}  // namespace

TEST(Activate, SigmoidSymmetryPoint) { EXPECT_EQ(activate(Activation::Sigmoid, Vector{0.0})[0], 0.5); }

TEST(Activate, SoftmaxOfConstantIsUniform) {
  for (double c : {-700.0, -3.0, 0.0, 12.5, 700.0}) {
    const auto p = activate(Activation::Softmax, Vector{c, c, c});
    for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(Activate, SoftmaxDirectEvaluation) {
  const auto p = activate(Activation::Softmax, Vector{1, 2, 3});
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(p[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(p[1], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(p[2], std::exp(3.0) / z, 1e-15);
  EXPECT_NEAR(p[0], 0.09003, 1e-5);
  EXPECT_NEAR(p[1], 0.24473, 1e-5);
  EXPECT_NEAR(p[2], 0.66524, 1e-5);
}

TEST(Activate, RangesHold) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    // Open bounds are representable only away from saturation (|a| < ~18 for tanh).
    const auto pre = random_vector(20, rng, -15, 15);
    for (double v : activate(Activation::Sigmoid, random_vector(20, rng, -50, 50))) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (double v : activate(Activation::Sigmoid, pre)) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
    for (double v : activate(Activation::Tanh, pre)) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
    for (double v : activate(Activation::Relu, pre)) EXPECT_GE(v, 0.0);
    EXPECT_EQ(activate(Activation::Linear, pre), pre);
    const auto p = activate(Activation::Softmax, pre);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
  }
}

TEST(Activate, SigmoidSaturatesWithoutOverflow) {
  const auto v = activate(Activation::Sigmoid, Vector{-800, 800});
  EXPECT_TRUE(std::isfinite(v[0]));
  EXPECT_EQ(v[1], 1.0);
}

TEST(Activate, SoftmaxFiniteAtExtremeLogits) {
  const auto p = activate(Activation::Softmax, Vector{700, -700, 0, 699});
  for (double v : p) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(sum(p), 1.0, 1e-12);
}

TEST(ActivateGrad, ConventionPoints) {
  EXPECT_EQ(activate_grad(Activation::Sigmoid, Vector{0.5})[0], 0.25);
  EXPECT_EQ(activate_grad(Activation::Tanh, Vector{0.0})[0], 1.0);
  EXPECT_EQ(activate_grad(Activation::Relu, Vector{0.0})[0], 0.0);
  EXPECT_EQ(activate_grad(Activation::Relu, Vector{2.0})[0], 1.0);
  EXPECT_EQ(activate_grad(Activation::Linear, Vector{-3.0})[0], 1.0);
}

TEST(ActivateGrad, SoftmaxIsAContractError) {
  try {
    activate_grad(Activation::Softmax, Vector{0.5, 0.5});
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("NLL"), std::string::npos) << e.what();
  }
}

TEST(ActivationNames, RoundTrip) {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu, Activation::Softmax,
                 Activation::Linear}) {
    EXPECT_EQ(parse_activation(to_string(a)), a);
  }
  EXPECT_THROW(parse_activation("swish"), ArgumentError);
}

TEST(AffineForward, IdentityLinear) {
  const auto out = affine_forward(layer(Matrix::identity(3), Vector(3), Activation::Linear),
                                  Vector{1, -2, 3});
  EXPECT_EQ(out.out, (Vector{1, -2, 3}));
  EXPECT_EQ(out.pre, out.out);
}

TEST(AffineForward, ZeroWeightsGiveBias) {
  const auto out = affine_forward(layer(Matrix(1, 4), Vector{3}, Activation::Linear),
                                  Vector{9, 8, 7, 6});
  EXPECT_EQ(out.out, (Vector{3}));
}

TEST(AffineForward, SigmoidAtZero) {
  const auto out = affine_forward(layer(Matrix{{1, 1}}, Vector{0}, Activation::Sigmoid), Vector{0, 0});
  EXPECT_EQ(out.out, (Vector{0.5}));
}

TEST(AffineForward, ShapeMismatch) {
  EXPECT_THROW(affine_forward(layer(Matrix(2, 3), Vector(2), Activation::Linear), Vector{1, 2}),
               ShapeError);
}

TEST(DenseLayer, ValidateChecksBiasLength) {
  EXPECT_THROW(layer(Matrix(2, 3), Vector(3), Activation::Linear).validate(), ShapeError);
  EXPECT_NO_THROW(layer(Matrix(2, 3), Vector(2), Activation::Linear).validate());
}

TEST(CrossEntropyRecon, PerfectReconstructionIsZero) {
  EXPECT_NEAR(cross_entropy_recon(Vector{1, 0}, Vector{1, 0}), 0.0, 1e-11);
}

TEST(CrossEntropyRecon, DirectEvaluation) {
  EXPECT_NEAR(cross_entropy_recon(Vector{0.5}, Vector{0.5}), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy_recon(Vector{1, 0}, Vector{0.9, 0.2}),
              -(std::log(0.9) + std::log(0.8)), 1e-15);
  EXPECT_NEAR(cross_entropy_recon(Vector{1, 0}, Vector{0.9, 0.2}), 0.32850, 1e-5);
}

TEST(CrossEntropyRecon, LengthMismatch) {
  EXPECT_THROW(cross_entropy_recon(Vector{1, 0}, Vector{1}), ShapeError);
}

TEST(CrossEntropyRecon, MinimumAtPerfectReconstructionForBinaryX) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    Vector x(6), z(6);
    for (std::size_t i = 0; i < 6; ++i) {
      x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      z[i] = rng.uniform(0, 1);
    }
    const double l = cross_entropy_recon(x, z);
    EXPECT_GE(l, 0.0);
    EXPECT_GE(l, cross_entropy_recon(x, x));
  }
}

TEST(NllLoss, Examples) {
  Vector one_hot(10);
  one_hot[0] = 1.0;
  EXPECT_NEAR(nll_loss(one_hot, 0), 0.0, 1e-15);
  EXPECT_NEAR(nll_loss(Vector(10, 0.1), 7), std::log(10.0), 1e-14);
  EXPECT_NEAR(nll_loss(Vector{0.1, 0.9}, 1), -std::log(0.9), 1e-15);
  EXPECT_NEAR(nll_loss(Vector{0.1, 0.9}, 1), 0.10536, 1e-5);
  EXPECT_NEAR(nll_loss(one_hot, 3), -std::log(1e-12), 1e-9);
}

TEST(NllLoss, LabelOutOfRange) { EXPECT_THROW(nll_loss(Vector{0.5, 0.5}, 2), ArgumentError); }

TEST(Init, HalfWidths) {
  EXPECT_DOUBLE_EQ(init_half_width(Activation::Sigmoid, 4, 2), 4.0);
  EXPECT_DOUBLE_EQ(init_half_width(Activation::Tanh, 4, 2), 1.0);
  EXPECT_DOUBLE_EQ(init_half_width(Activation::Relu, 10, 14), 0.5);
  Rng rng(2);
  const auto l = make_dense(30, 20, Activation::Sigmoid, rng);
  const double hw = init_half_width(Activation::Sigmoid, 30, 20);
  for (double w : l.weights.span()) {
    EXPECT_GE(w, -hw);
    EXPECT_LT(w, hw);
  }
  EXPECT_EQ(l.bias, Vector(20));
}

TEST(SgdStep, ZeroGradientLeavesParams) {
  Rng rng(1);
  std::vector<DenseLayer> net{make_dense(3, 2, Activation::Sigmoid, rng)};
  const auto before = net;
  sgd_step(net, zero_grads(net), SgdConfig{});
  EXPECT_EQ(net, before);
}

TEST(SgdStep, OneArithmeticStep) {
  std::vector<DenseLayer> net{layer(Matrix{{2}}, Vector{0}, Activation::Linear)};
  std::vector<LayerGrads> g{{Matrix{{0.5}}, Vector{0}}};
  SgdConfig cfg;
  cfg.learning_rate = 1.0;
  sgd_step(net, g, cfg);
  EXPECT_EQ(net[0].weights, (Matrix{{1.5}}));
}

TEST(SgdStep, TwoStepsEqualOneSummedStep) {
  std::vector<DenseLayer> a{layer(Matrix{{2, -1}}, Vector{0.5}, Activation::Linear)};
  auto b = a;
  std::vector<LayerGrads> g{{Matrix{{0.25, 0.5}}, Vector{1}}};
  std::vector<LayerGrads> g2{{Matrix{{0.5, 1.0}}, Vector{2}}};
  SgdConfig cfg;
  cfg.learning_rate = 0.5;
  sgd_step(a, g, cfg);
  sgd_step(a, g, cfg);
  sgd_step(b, g2, cfg);
  EXPECT_EQ(a, b);
}

TEST(SgdStep, ZeroLearningRateIsIdentity) {
  Rng rng(8);
  std::vector<DenseLayer> net{make_dense(4, 3, Activation::Tanh, rng),
                              make_dense(3, 2, Activation::Softmax, rng)};
  const auto before = net;
  auto g = zero_grads(net);
  for (auto& lg : g) {
    for (double& v : lg.weights.span()) v = rng.uniform(-5, 5);
    for (double& v : lg.bias) v = rng.uniform(-5, 5);
  }
  SgdConfig cfg;
  cfg.learning_rate = 0.0;
  sgd_step(net, g, cfg);
  EXPECT_EQ(net, before);
}

TEST(SgdStep, ShapeMismatch) {
  Rng rng(1);
  std::vector<DenseLayer> net{make_dense(3, 2, Activation::Sigmoid, rng)};
  std::vector<LayerGrads> g{{Matrix(3, 2), Vector(2)}};
  EXPECT_THROW(sgd_step(net, g, SgdConfig{}), ShapeError);
}

TEST(SgdConfig, Validation) {
  EXPECT_THROW((SgdConfig{-0.1, 20, 1, 0}).validate(), ArgumentError);
  EXPECT_THROW((SgdConfig{0.1, 0, 1, 0}).validate(), ArgumentError);
  EXPECT_NO_THROW((SgdConfig{0.1, 1, 1, 0}).validate());
}

TEST(Backprop, SoftmaxNllOutputDeltaIsProbsMinusOneHot) {
  // Zero weights give probs [0.5, 0.5]; the bias gradient is the output delta.
  std::vector<DenseLayer> net{layer(Matrix(2, 3), Vector(2), Activation::Softmax)};
  const auto g = backprop(net, Vector{1, 2, 3}, std::size_t{0}, Loss::SoftmaxNll);
  EXPECT_EQ(g.layers[0].bias, (Vector{-0.5, 0.5}));
  EXPECT_NEAR(g.loss, std::log(2.0), 1e-15);
}

TEST(Backprop, MatchesFiniteDifferencesOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    for (auto hidden : {Activation::Sigmoid, Activation::Tanh, Activation::Linear}) {
      std::vector<DenseLayer> net{make_dense(6, 5, hidden, rng), make_dense(5, 4, Activation::Softmax, rng)};
      const auto x = random_vector(6, rng);
      EXPECT_LT(gradient_error(net, x, std::size_t{rng.below(4)}, Loss::SoftmaxNll), 1e-4)
          << "seed " << seed << " " << to_string(hidden);
    }
    std::vector<DenseLayer> recon{make_dense(6, 5, Activation::Tanh, rng),
                                  make_dense(5, 4, Activation::Sigmoid, rng)};
    const auto x = random_vector(6, rng);
    EXPECT_LT(gradient_error(recon, x, random_vector(4, rng, 0, 1), Loss::CrossEntropyRecon), 1e-4);
    std::vector<DenseLayer> linear{make_dense(6, 5, Activation::Sigmoid, rng),
                                   make_dense(5, 4, Activation::Linear, rng)};
    EXPECT_LT(gradient_error(linear, x, random_vector(4, rng, -2, 2), Loss::SquaredErrorRecon), 1e-4);
  }
}

TEST(Backprop, ReluNetAwayFromKinks) {
  Rng rng(21);
  std::vector<DenseLayer> net{make_dense(6, 5, Activation::Relu, rng), make_dense(5, 4, Activation::Softmax, rng)};
  for (double& b : net[0].bias) b = 0.1;  // keep pre-activations clear of 0 +- h
  const auto x = random_vector(6, rng);
  EXPECT_LT(gradient_error(net, x, std::size_t{2}, Loss::SoftmaxNll), 1e-4);
}

TEST(Backprop, DuplicateExampleDoublesContribution) {
  Rng rng(3);
  std::vector<DenseLayer> net{make_dense(4, 3, Activation::Sigmoid, rng), make_dense(3, 2, Activation::Softmax, rng)};
  const auto x = random_vector(4, rng);
  Matrix once(1, 4, x.values());
  Matrix twice(2, 4);
  for (std::size_t j = 0; j < 4; ++j) twice(0, j) = twice(1, j) = x[j];
  auto g1 = zero_grads(net), g2 = zero_grads(net);
  const std::vector<std::size_t> l1{1}, l2{1, 1};
  const double loss1 = backprop_batch(net, once, l1, g1);
  const double loss2 = backprop_batch(net, twice, l2, g2);
  EXPECT_EQ(loss2, 2 * loss1);
  for (std::size_t l = 0; l < net.size(); ++l) {
    for (std::size_t i = 0; i < g1[l].weights.size(); ++i)
      EXPECT_EQ(g2[l].weights.span()[i], 2 * g1[l].weights.span()[i]);
    for (std::size_t i = 0; i < g1[l].bias.size(); ++i) EXPECT_EQ(g2[l].bias[i], 2 * g1[l].bias[i]);
  }
}

TEST(Backprop, SingleSampleEqualsBatchOfOne) {
  Rng rng(12);
  std::vector<DenseLayer> net{make_dense(5, 4, Activation::Tanh, rng), make_dense(4, 3, Activation::Softmax, rng)};
  const auto x = random_vector(5, rng);
  const auto g = backprop(net, x, std::size_t{2}, Loss::SoftmaxNll);
  auto gb = zero_grads(net);
  const std::vector<std::size_t> labels{2};
  backprop_batch(net, Matrix(1, 5, x.values()), labels, gb);
  for (std::size_t l = 0; l < net.size(); ++l) {
    EXPECT_EQ(g.layers[l].weights, gb[l].weights);
    EXPECT_EQ(g.layers[l].bias, gb[l].bias);
  }
}

TEST(Backprop, IncompatibleLossIsAContractError) {
  Rng rng(1);
  std::vector<DenseLayer> sig{make_dense(3, 2, Activation::Sigmoid, rng)};
  EXPECT_THROW(backprop(sig, Vector{1, 2, 3}, std::size_t{0}, Loss::SoftmaxNll), ContractError);
  std::vector<DenseLayer> soft{make_dense(3, 2, Activation::Softmax, rng)};
  EXPECT_THROW(backprop(soft, Vector{1, 2, 3}, Vector{0, 1}, Loss::CrossEntropyRecon), ContractError);
  std::vector<DenseLayer> lin{make_dense(3, 2, Activation::Linear, rng)};
  EXPECT_THROW(backprop(lin, Vector{1, 2, 3}, Vector{0, 1}, Loss::CrossEntropyRecon), ContractError);
  std::vector<DenseLayer> inner{make_dense(3, 2, Activation::Softmax, rng),
                                make_dense(2, 2, Activation::Softmax, rng)};
  EXPECT_THROW(backprop(inner, Vector{1, 2, 3}, std::size_t{0}, Loss::SoftmaxNll), ContractError);
}

TEST(Backprop, ShapeChainChecked) {
  Rng rng(1);
  std::vector<DenseLayer> net{make_dense(3, 2, Activation::Sigmoid, rng),
                              make_dense(3, 2, Activation::Softmax, rng)};
  EXPECT_THROW(backprop(net, Vector{1, 2, 3}, std::size_t{0}, Loss::SoftmaxNll), ShapeError);
}

TEST(ForwardRows, MatchesOracle) {
  Rng rng(30);
  std::vector<DenseLayer> net{make_dense(7, 5, Activation::Relu, rng),
                              make_dense(5, 4, Activation::Tanh, rng),
                              make_dense(4, 3, Activation::Softmax, rng)};
  const auto x = testing_support::random_matrix(10, 7, rng);
  const auto acts = forward_rows(net, x);
  ASSERT_EQ(acts.size(), 3u);
  for (std::size_t r = 0; r < 10; ++r) {
    const auto expected = oracle::forward(testing_support::net(net), testing_support::vec(x.row(r)));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(acts[2](r, c), expected[c], 1e-14);
  }
}
