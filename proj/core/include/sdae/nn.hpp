#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sdae/linalg.hpp"
#include "sdae/rng.hpp"

namespace sdae {

enum class Activation { Sigmoid, Tanh, Relu, Softmax, Linear };

std::string_view to_string(Activation a) noexcept;
// Accepts the lower-case names produced by to_string. Throws ArgumentError.
Activation parse_activation(std::string_view name);

// Probability floor shared by both losses.
inline constexpr double kProbFloor = 1e-12;

Vector activate(Activation kind, std::span<const double> pre);

// Row-wise in-place activation; softmax normalises each row independently.
void activate_rows(Activation kind, Matrix& m);

// Elementwise derivative written in terms of the activation output:
// sigmoid o(1-o), tanh 1-o^2, relu [o > 0], linear 1. Softmax has no
// elementwise derivative; its gradient is fused into the NLL loss and asking
// for it throws ContractError.
Vector activate_grad(Activation kind, std::span<const double> out);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Sigmoid;

  std::size_t inputs() const noexcept { return weights.cols(); }
  std::size_t outputs() const noexcept { return weights.rows(); }

  // Throws ShapeError / NumericError if the invariants are broken.
  void validate() const;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Half-width of the uniform initialisation range for a layer:
// sqrt(6 / (fan_in + fan_out)), times 4 for sigmoid layers.
double init_half_width(Activation kind, std::size_t fan_in, std::size_t fan_out);

// Weights uniform in +-init_half_width, biases zero.
DenseLayer make_dense(std::size_t inputs, std::size_t outputs, Activation kind, Rng& rng);

struct AffineOutput {
  Vector pre;
  Vector out;
};

AffineOutput affine_forward(const DenseLayer& layer, std::span<const double> input);

// -sum_k [x_k ln z_k + (1 - x_k) ln(1 - z_k)] with z clamped to
// [kProbFloor, 1 - kProbFloor].
double cross_entropy_recon(std::span<const double> x, std::span<const double> z);

// 0.5 * ||x - z||^2, the reconstruction loss for linear decoders.
double squared_error_recon(std::span<const double> x, std::span<const double> z);

// -ln max(probs[label], kProbFloor)
double nll_loss(std::span<const double> probs, std::size_t label);

struct SgdConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 20;
  std::size_t epochs = 15;
  std::uint64_t seed = 0;

  // learning_rate >= 0 (0 is allowed as a no-op run), batch_size >= 1.
  void validate() const;
};

struct LayerGrads {
  Matrix weights;
  Vector bias;
};

std::vector<LayerGrads> zero_grads(std::span<const DenseLayer> layers);

// p <- p - learning_rate * g for every parameter. No other state.
void sgd_step(std::span<DenseLayer> layers, std::span<const LayerGrads> grads,
              const SgdConfig& cfg);

enum class Loss { SoftmaxNll, CrossEntropyRecon, SquaredErrorRecon };

// Class label for SoftmaxNll, reconstruction target otherwise.
using Target = std::variant<std::size_t, Vector>;

struct Gradients {
  double loss = 0.0;
  std::vector<LayerGrads> layers;
};

// Gradients of a single example's loss with respect to every weight and bias.
// The final layer's activation must match the loss: Softmax/SoftmaxNll,
// Sigmoid/CrossEntropyRecon, Linear/SquaredErrorRecon; any other pairing
// throws ContractError. Output deltas are fused (probs - one_hot, z - x).
Gradients backprop(std::span<const DenseLayer> net, std::span<const double> input,
                   const Target& target, Loss loss);

// Batch forms. `inputs` holds one sample per row. Gradients are summed (not
// averaged) into `grads`, which must already have the right shapes; the
// summed loss is returned.
double backprop_batch(std::span<const DenseLayer> net, const Matrix& inputs,
                      std::span<const std::size_t> labels, std::span<LayerGrads> grads);
double backprop_batch(std::span<const DenseLayer> net, const Matrix& inputs,
                      const Matrix& targets, Loss loss, std::span<LayerGrads> grads);

// Activations of every layer for a batch; element i is the output of layer i.
std::vector<Matrix> forward_rows(std::span<const DenseLayer> net, const Matrix& inputs);

// Multiply every gradient entry by `factor` (used to turn sums into means).
void scale_grads(std::span<LayerGrads> grads, double factor);

}  // namespace sdae
