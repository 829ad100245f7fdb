#include "sdae/autoencoder.hpp"

#include <cmath>
#include <string>

#include "sdae/data.hpp"
#include "sdae/error.hpp"

namespace sdae {

void CorruptionSpec::validate() const {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw ArgumentError("corruption level must lie in [0,1], got " + std::to_string(level));
  }
}

Vector corrupt(std::span<const double> x, const CorruptionSpec& spec, Rng& rng) {
  spec.validate();
  Matrix m(1, x.size(), std::vector<double>(x.begin(), x.end()));
  corrupt_rows(m, spec.level, rng);
  return Vector(std::vector<double>(m.span().begin(), m.span().end()));
}

void corrupt_rows(Matrix& x, double level, Rng& rng) {
  if (level <= 0.0) return;
  for (double& v : x.span()) {
    if (rng.bernoulli(level)) v = 0.0;
  }
}

Loss DenoisingAutoencoder::reconstruction_loss() const {
  return decoder_activation == Activation::Sigmoid ? Loss::CrossEntropyRecon
                                                   : Loss::SquaredErrorRecon;
}

void DenoisingAutoencoder::validate() const {
  encoder.validate();
  corruption.validate();
  if (decoder_bias.size() != encoder.inputs()) {
    throw ShapeError("autoencoder: decoder bias has length " +
                     std::to_string(decoder_bias.size()) + " but input dimension is " +
                     std::to_string(encoder.inputs()));
  }
  if (decoder_activation != Activation::Sigmoid && decoder_activation != Activation::Linear) {
    throw ContractError("autoencoder decoder must be sigmoid or linear");
  }
  if (encoder.activation == Activation::Softmax) {
    throw ContractError("softmax is not a hidden activation");
  }
}

Activation decoder_activation_for(bool targets_in_unit_interval) noexcept {
  return targets_in_unit_interval ? Activation::Sigmoid : Activation::Linear;
}

bool unit_interval_output(Activation a) noexcept {
  return a == Activation::Sigmoid || a == Activation::Softmax;
}

DenoisingAutoencoder make_da(std::size_t input_dim, std::size_t code_dim, Activation encoder_act,
                             Activation decoder_act, CorruptionSpec corruption, Rng& rng) {
  DenoisingAutoencoder da{make_dense(input_dim, code_dim, encoder_act, rng), Vector(input_dim),
                          decoder_act, corruption};
  da.validate();
  return da;
}

void da_forward_rows(const DenoisingAutoencoder& da, const Matrix& x_tilde, Matrix& codes,
                     Matrix& recon) {
  affine_rows(da.encoder.weights, da.encoder.bias, x_tilde, codes);
  activate_rows(da.encoder.activation, codes);
  affine_rows_transposed(da.encoder.weights, da.decoder_bias, codes, recon);
  activate_rows(da.decoder_activation, recon);
}

DaForward da_forward(const DenoisingAutoencoder& da, std::span<const double> x_tilde) {
  if (x_tilde.size() != da.input_dim()) {
    throw ShapeError("da_forward: expected input of length " + std::to_string(da.input_dim()) +
                     ", got " + std::to_string(x_tilde.size()));
  }
  const Matrix in(1, x_tilde.size(), std::vector<double>(x_tilde.begin(), x_tilde.end()));
  Matrix y, z;
  da_forward_rows(da, in, y, z);
  return {Vector(std::vector<double>(y.span().begin(), y.span().end())),
          Vector(std::vector<double>(z.span().begin(), z.span().end()))};
}

Matrix encode_rows(const DenoisingAutoencoder& da, const Matrix& x) {
  Matrix y;
  affine_rows(da.encoder.weights, da.encoder.bias, x, y);
  activate_rows(da.encoder.activation, y);
  return y;
}

double reconstruction_loss(const DenoisingAutoencoder& da, std::span<const double> x,
                           std::span<const double> z) {
  return da.reconstruction_loss() == Loss::CrossEntropyRecon ? cross_entropy_recon(x, z)
                                                             : squared_error_recon(x, z);
}

DaGradients da_gradients(const DenoisingAutoencoder& da, const Matrix& clean,
                         const Matrix& corrupted) {
  if (clean.rows() != corrupted.rows() || clean.cols() != da.input_dim() ||
      corrupted.cols() != da.input_dim()) {
    throw ShapeError("da_gradients: batch shape does not match the autoencoder");
  }
  const auto& w = da.encoder.weights;
  DaGradients g{Matrix(w.rows(), w.cols()), Vector(da.code_dim()), Vector(da.input_dim()), 0.0};

  Matrix y, z;
  da_forward_rows(da, corrupted, y, z);

  // Output delta is z - x for both sigmoid/cross-entropy and
  // linear/squared-error pairings.
  Matrix dz = z;
  for (std::size_t b = 0; b < clean.rows(); ++b) {
    g.loss += reconstruction_loss(da, clean.row(b), z.row(b));
    axpy(-1.0, clean.row(b), dz.row(b));
    axpy(1.0, dz.row(b), g.decoder_bias.span());
  }

  // Code delta: (W dz) scaled by the encoder derivative.
  Matrix dy;
  affine_rows(w, Vector(da.code_dim()), dz, dy);
  const Activation act = da.encoder.activation;
  for (std::size_t b = 0; b < dy.rows(); ++b) {
    auto d = dy.row(b);
    const auto yb = y.row(b);
    for (std::size_t j = 0; j < d.size(); ++j) {
      switch (act) {
        case Activation::Sigmoid: d[j] *= yb[j] * (1.0 - yb[j]); break;
        case Activation::Tanh: d[j] *= 1.0 - yb[j] * yb[j]; break;
        case Activation::Relu: d[j] = yb[j] > 0.0 ? d[j] : 0.0; break;
        default: break;
      }
    }
    axpy(1.0, d, g.encoder_bias.span());
  }

  // dL/dW[j][k] = dy[j] * x~[k]  (encoder path)  +  y[j] * dz[k]  (decoder path, transposed)
  for (std::size_t b = 0; b < clean.rows(); ++b) {
    const auto xt = corrupted.row(b);
    const auto d = dy.row(b);
    const auto yb = y.row(b);
    const auto dzb = dz.row(b);
    for (std::size_t j = 0; j < d.size(); ++j) {
      auto row = g.weights.row(j);
      if (d[j] != 0.0) axpy(d[j], xt, row);
      if (yb[j] != 0.0) axpy(yb[j], dzb, row);
    }
  }
  return g;
}

DaTraining train_da(DenoisingAutoencoder da, const Matrix& inputs, const SgdConfig& cfg,
                    const EpochCallback& on_epoch, std::string_view phase) {
  cfg.validate();
  da.validate();
  if (inputs.cols() != da.input_dim()) {
    throw ShapeError("train_da: inputs have dimension " + std::to_string(inputs.cols()) +
                     ", autoencoder expects " + std::to_string(da.input_dim()));
  }
  if (inputs.rows() == 0) throw ArgumentError("train_da: no training inputs");

  Rng noise(da.corruption.seed);
  DaTraining out{std::move(da), {}};
  auto& model = out.da;
  out.epoch_loss.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = epoch_batches(inputs.rows(), cfg.batch_size, cfg.seed, epoch);
    double total = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Matrix clean = gather_rows(inputs, batches[bi]);
      Matrix noisy = clean;
      corrupt_rows(noisy, model.corruption.level, noise);
      const DaGradients g = da_gradients(model, clean, noisy);
      if (!std::isfinite(g.loss)) {
        throw NumericError("non-finite reconstruction loss at epoch " + std::to_string(epoch + 1) +
                           ", batch " + std::to_string(bi + 1));
      }
      total += g.loss;
      const double step = cfg.learning_rate / static_cast<double>(clean.rows());
      axpy(-step, g.weights.span(), model.encoder.weights.span());
      axpy(-step, g.encoder_bias.span(), model.encoder.bias.span());
      axpy(-step, g.decoder_bias.span(), model.decoder_bias.span());
    }
    out.epoch_loss.push_back(total / static_cast<double>(inputs.rows()));
    if (on_epoch) on_epoch(phase, epoch + 1);
  }
  return out;
}

}  // namespace sdae
