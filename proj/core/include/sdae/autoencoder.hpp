#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "sdae/linalg.hpp"
#include "sdae/nn.hpp"
#include "sdae/rng.hpp"

namespace sdae {

// Masking noise: each input component is zeroed with probability `level`.
struct CorruptionSpec {
  double level = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

Vector corrupt(std::span<const double> x, const CorruptionSpec& spec, Rng& rng);

// In place over every row; draws one uniform per component, row-major.
void corrupt_rows(Matrix& x, double level, Rng& rng);

// Called after each finished epoch with a phase label ("pretrain/2", "finetune").
// Throwing from the callback aborts training.
using EpochCallback = std::function<void(std::string_view phase, std::size_t epoch)>;

// Tied-weight denoising autoencoder. The decoder matrix is never stored: it is
// encoder.weights transposed, so the two can never drift apart.
//
//   y = s(W x~ + b)        encoder, W is code_dim x input_dim
//   z = s'(W^T y + b')     decoder
struct DenoisingAutoencoder {
  DenseLayer encoder;
  Vector decoder_bias;
  Activation decoder_activation = Activation::Sigmoid;
  CorruptionSpec corruption;

  std::size_t input_dim() const noexcept { return encoder.inputs(); }
  std::size_t code_dim() const noexcept { return encoder.outputs(); }

  Matrix decoder_weights() const { return transpose(encoder.weights); }

  // Sigmoid decoders pair with cross-entropy, linear decoders with squared error.
  Loss reconstruction_loss() const;

  void validate() const;

  friend bool operator==(const DenoisingAutoencoder&, const DenoisingAutoencoder&) = default;
};

// Sigmoid when reconstruction targets lie in [0,1], Linear otherwise.
Activation decoder_activation_for(bool targets_in_unit_interval) noexcept;

// True when the activation's outputs always lie in [0,1].
bool unit_interval_output(Activation a) noexcept;

DenoisingAutoencoder make_da(std::size_t input_dim, std::size_t code_dim, Activation encoder_act,
                             Activation decoder_act, CorruptionSpec corruption, Rng& rng);

struct DaForward {
  Vector y;
  Vector z;
};

DaForward da_forward(const DenoisingAutoencoder& da, std::span<const double> x_tilde);

// Batch forward; fills `codes` and `recon` with one row per input row.
void da_forward_rows(const DenoisingAutoencoder& da, const Matrix& x_tilde, Matrix& codes,
                     Matrix& recon);

// Clean encoder output only, for feeding the next layer of a stack.
Matrix encode_rows(const DenoisingAutoencoder& da, const Matrix& x);

// Loss of reconstruction z against the clean input x.
double reconstruction_loss(const DenoisingAutoencoder& da, std::span<const double> x,
                           std::span<const double> z);

struct DaGradients {
  Matrix weights;  // encoder-path plus transposed decoder-path contribution
  Vector encoder_bias;
  Vector decoder_bias;
  double loss = 0.0;  // summed over rows
};

// Gradients summed over the rows of a batch. The forward pass runs on
// `corrupted`; the loss is always taken against `clean`.
DaGradients da_gradients(const DenoisingAutoencoder& da, const Matrix& clean,
                         const Matrix& corrupted);

struct DaTraining {
  DenoisingAutoencoder da;
  std::vector<double> epoch_loss;  // mean per-example loss, one entry per epoch
};

// Minibatch SGD on the denoising criterion. Each epoch draws fresh masking
// noise from a stream seeded by da.corruption.seed; batch order comes from
// cfg.seed. Throws NumericError naming epoch and batch on a non-finite loss.
DaTraining train_da(DenoisingAutoencoder da, const Matrix& inputs, const SgdConfig& cfg,
                    const EpochCallback& on_epoch = {}, std::string_view phase = "pretrain");

}  // namespace sdae
