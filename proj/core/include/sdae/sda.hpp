#pragma once

// Stacked denoising autoencoders: greedy layer-wise pre-training, unrolling
// into a softmax classifier, supervised fine-tuning and evaluation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sdae/autoencoder.hpp"
#include "sdae/data.hpp"
#include "sdae/nn.hpp"

namespace sdae {

// FirstLayerOnly: only the first DA sees masking noise, deeper DAs train on
// clean codes. EveryLayer: every DA corrupts its own inputs.
enum class CorruptionMode { FirstLayerOnly, EveryLayer };

std::string_view to_string(CorruptionMode m) noexcept;
CorruptionMode parse_corruption_mode(std::string_view name);

struct StackSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  Activation hidden_activation = Activation::Sigmoid;
  std::size_t n_classes = 10;
  CorruptionSpec corruption;
  CorruptionMode corruption_mode = CorruptionMode::EveryLayer;

  void validate() const;
  friend bool operator==(const StackSpec&, const StackSpec&) = default;
};

// Hidden encoder layers followed by one softmax output layer.
struct SupervisedNet {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().inputs(); }
  std::size_t n_classes() const noexcept { return layers.empty() ? 0 : layers.back().outputs(); }
  std::size_t hidden_layers() const noexcept { return layers.empty() ? 0 : layers.size() - 1; }

  // Shapes chain, output is softmax, no softmax below it, parameters finite.
  void validate() const;

  friend bool operator==(const SupervisedNet&, const SupervisedNet&) = default;
};

struct FinetuneConfig {
  SgdConfig sgd{0.1, 20, 200, 0};
  std::size_t patience = 10;
  double min_delta = 1e-4;

  void validate() const;
};

// Defaults used when nothing else is configured.
inline SgdConfig default_pretrain_config() { return SgdConfig{0.01, 20, 15, 0}; }

// Seeds and initial parameters of stack layer `layer`, exposed so a single
// layer can be reproduced with train_da.
DenoisingAutoencoder initial_layer_da(const StackSpec& spec, std::size_t layer,
                                      const SgdConfig& cfg);
SgdConfig layer_sgd_config(const SgdConfig& cfg, std::size_t layer);

struct Pretraining {
  std::vector<DenoisingAutoencoder> das;
  std::vector<std::vector<double>> loss_traces;  // per layer, per epoch
};

// DA k trains on the clean encoder outputs of DAs 1..k-1.
Pretraining pretrain(const StackSpec& spec, const Matrix& unlabeled, const SgdConfig& cfg,
                     const EpochCallback& on_epoch = {});

// Copy each encoder verbatim and add a fresh softmax layer drawn from `rng`.
SupervisedNet unroll(std::span<const DenoisingAutoencoder> das, const StackSpec& spec, Rng& rng);

// Same architecture as unroll() but every layer randomly initialised.
SupervisedNet random_net(const StackSpec& spec, Rng& rng);

// Zero hidden layers: multinomial logistic regression.
SupervisedNet logistic_net(std::size_t input_dim, std::size_t n_classes, Rng& rng);

// One pass of minibatch SGD on softmax-NLL over all layers; returns the mean
// per-example training loss. Batch order is a function of (cfg.seed, epoch).
double train_epoch(SupervisedNet& net, const LabeledSet& train, const SgdConfig& cfg,
                   std::size_t epoch);

// cfg.epochs passes of train_epoch with no validation; returns per-epoch loss.
std::vector<double> train_supervised(SupervisedNet& net, const LabeledSet& train,
                                     const SgdConfig& cfg, const EpochCallback& on_epoch = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_error = 0.0;  // fraction in [0,1]
};

struct Finetuning {
  SupervisedNet net;  // snapshot with the lowest validation error
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_valid_error = 1.0;
  std::size_t epochs_ran() const noexcept { return history.size(); }
};

// Minibatch SGD through every layer. After each epoch the validation error is
// recorded; training stops after `patience` epochs without an improvement
// larger than min_delta, or when the epoch budget is spent.
Finetuning finetune(SupervisedNet net, const LabeledSet& train, const LabeledSet& valid,
                    const FinetuneConfig& cfg, const EpochCallback& on_epoch = {});

Vector predict(const SupervisedNet& net, std::span<const double> x);
Matrix predict_rows(const SupervisedNet& net, const Matrix& x);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);
std::size_t classify(const SupervisedNet& net, std::span<const double> x);

struct Evaluation {
  double error_rate = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t total = 0;
};

Evaluation evaluate(const SupervisedNet& net, const LabeledSet& data);

// Builds an Evaluation from predictions; shared by the baselines.
Evaluation tally(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                 std::size_t n_classes);

}  // namespace sdae
