#include "sdae/sda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sdae/error.hpp"

namespace sdae {
namespace {

constexpr std::uint64_t kInitSalt = 0x1000;
constexpr std::uint64_t kOrderSalt = 0x2000;
constexpr std::size_t kEvalChunk = 512;

}  // namespace

std::string_view to_string(CorruptionMode m) noexcept {
  return m == CorruptionMode::FirstLayerOnly ? "first_layer_only" : "every_layer";
}

CorruptionMode parse_corruption_mode(std::string_view name) {
  if (name == "first_layer_only") return CorruptionMode::FirstLayerOnly;
  if (name == "every_layer") return CorruptionMode::EveryLayer;
  throw ArgumentError("unknown corruption mode '" + std::string(name) + "'");
}

void StackSpec::validate() const {
  if (input_dim == 0) throw ArgumentError("stack: input_dim must be positive");
  if (hidden_dims.empty()) throw ArgumentError("stack: hidden_dims must not be empty");
  if (std::find(hidden_dims.begin(), hidden_dims.end(), 0u) != hidden_dims.end()) {
    throw ArgumentError("stack: hidden layer widths must be positive");
  }
  if (n_classes < 2) throw ArgumentError("stack: n_classes must be at least 2");
  if (hidden_activation == Activation::Softmax) {
    throw ArgumentError("stack: softmax is not a hidden activation");
  }
  corruption.validate();
}

void SupervisedNet::validate() const {
  if (layers.empty()) throw ShapeError("supervised net has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].inputs() != layers[l - 1].outputs()) {
      throw ShapeError("layer " + std::to_string(l) + " takes " +
                       std::to_string(layers[l].inputs()) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " +
                       std::to_string(layers[l - 1].outputs()));
    }
    const bool last = l + 1 == layers.size();
    if (last != (layers[l].activation == Activation::Softmax)) {
      throw ShapeError("softmax must be the output activation and only the output activation");
    }
  }
}

void FinetuneConfig::validate() const {
  sgd.validate();
  if (patience == 0) throw ArgumentError("patience must be at least 1");
  if (!(min_delta >= 0.0)) throw ArgumentError("min_delta must be non-negative");
}

DenoisingAutoencoder initial_layer_da(const StackSpec& spec, std::size_t layer,
                                      const SgdConfig& cfg) {
  spec.validate();
  if (layer >= spec.hidden_dims.size()) throw ArgumentError("stack layer out of range");
  const std::size_t in = layer == 0 ? spec.input_dim : spec.hidden_dims[layer - 1];
  // Raw inputs are in [0,1]; deeper targets are codes of the previous layer.
  const bool unit_targets = layer == 0 || unit_interval_output(spec.hidden_activation);
  CorruptionSpec noise{spec.corruption.level, derive_seed(spec.corruption.seed, layer)};
  if (layer > 0 && spec.corruption_mode == CorruptionMode::FirstLayerOnly) noise.level = 0.0;
  Rng init(derive_seed(cfg.seed, kInitSalt + layer));
  return make_da(in, spec.hidden_dims[layer], spec.hidden_activation,
                 decoder_activation_for(unit_targets), noise, init);
}

SgdConfig layer_sgd_config(const SgdConfig& cfg, std::size_t layer) {
  SgdConfig out = cfg;
  out.seed = derive_seed(cfg.seed, kOrderSalt + layer);
  return out;
}

Pretraining pretrain(const StackSpec& spec, const Matrix& unlabeled, const SgdConfig& cfg,
                     const EpochCallback& on_epoch) {
  spec.validate();
  cfg.validate();
  if (unlabeled.cols() != spec.input_dim) {
    throw ShapeError("pretrain: inputs have dimension " + std::to_string(unlabeled.cols()) +
                     ", stack expects " + std::to_string(spec.input_dim));
  }
  Pretraining out;
  Matrix codes = unlabeled;
  for (std::size_t k = 0; k < spec.hidden_dims.size(); ++k) {
    const std::string phase = "pretrain/" + std::to_string(k + 1);
    auto trained =
        train_da(initial_layer_da(spec, k, cfg), codes, layer_sgd_config(cfg, k), on_epoch, phase);
    if (k + 1 < spec.hidden_dims.size()) codes = encode_rows(trained.da, codes);
    out.das.push_back(std::move(trained.da));
    out.loss_traces.push_back(std::move(trained.epoch_loss));
  }
  return out;
}

SupervisedNet unroll(std::span<const DenoisingAutoencoder> das, const StackSpec& spec, Rng& rng) {
  spec.validate();
  if (das.size() != spec.hidden_dims.size()) {
    throw ShapeError("unroll: " + std::to_string(das.size()) + " autoencoders for " +
                     std::to_string(spec.hidden_dims.size()) + " hidden layers");
  }
  SupervisedNet net;
  std::size_t dim = spec.input_dim;
  for (std::size_t k = 0; k < das.size(); ++k) {
    if (das[k].input_dim() != dim || das[k].code_dim() != spec.hidden_dims[k]) {
      throw ShapeError("unroll: autoencoder " + std::to_string(k + 1) + " is " +
                       std::to_string(das[k].input_dim()) + "->" +
                       std::to_string(das[k].code_dim()) + ", stack expects " +
                       std::to_string(dim) + "->" + std::to_string(spec.hidden_dims[k]));
    }
    net.layers.push_back(das[k].encoder);
    dim = das[k].code_dim();
  }
  net.layers.push_back(make_dense(dim, spec.n_classes, Activation::Softmax, rng));
  net.validate();
  return net;
}

SupervisedNet random_net(const StackSpec& spec, Rng& rng) {
  spec.validate();
  SupervisedNet net;
  std::size_t dim = spec.input_dim;
  for (auto width : spec.hidden_dims) {
    net.layers.push_back(make_dense(dim, width, spec.hidden_activation, rng));
    dim = width;
  }
  net.layers.push_back(make_dense(dim, spec.n_classes, Activation::Softmax, rng));
  return net;
}

SupervisedNet logistic_net(std::size_t input_dim, std::size_t n_classes, Rng& rng) {
  if (n_classes < 2) throw ArgumentError("logistic regression needs at least 2 classes");
  return SupervisedNet{{make_dense(input_dim, n_classes, Activation::Softmax, rng)}};
}

double train_epoch(SupervisedNet& net, const LabeledSet& train, const SgdConfig& cfg,
                   std::size_t epoch) {
  if (train.size() == 0) throw ArgumentError("train_epoch: empty training set");
  if (train.dim() != net.input_dim()) {
    throw ShapeError("train_epoch: data dimension " + std::to_string(train.dim()) +
                     " but network expects " + std::to_string(net.input_dim()));
  }
  const auto batches = epoch_batches(train.size(), cfg.batch_size, cfg.seed, epoch);
  auto grads = zero_grads(net.layers);
  std::vector<std::size_t> labels;
  double total = 0.0;
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const auto& batch = batches[bi];
    const Matrix x = gather_rows(train.inputs, batch);
    labels.clear();
    for (auto i : batch) labels.push_back(train.labels[i]);
    for (auto& g : grads) {
      std::fill(g.weights.span().begin(), g.weights.span().end(), 0.0);
      std::fill(g.bias.begin(), g.bias.end(), 0.0);
    }
    const double loss = backprop_batch(net.layers, x, labels, grads);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1) +
                         ", batch " + std::to_string(bi + 1));
    }
    total += loss;
    scale_grads(grads, 1.0 / static_cast<double>(batch.size()));
    sgd_step(net.layers, grads, cfg);
  }
  return total / static_cast<double>(train.size());
}

std::vector<double> train_supervised(SupervisedNet& net, const LabeledSet& train,
                                     const SgdConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  net.validate();
  train.validate();
  std::vector<double> losses;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    losses.push_back(train_epoch(net, train, cfg, e));
    if (on_epoch) on_epoch("train", e + 1);
  }
  return losses;
}

Finetuning finetune(SupervisedNet net, const LabeledSet& train, const LabeledSet& valid,
                    const FinetuneConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  net.validate();
  train.validate();
  valid.validate();
  Finetuning out{net, {}, 0, std::numeric_limits<double>::infinity()};
  if (cfg.sgd.epochs == 0) {
    out.best_valid_error = evaluate(net, valid).error_rate;
    return out;
  }
  std::size_t since_best = 0;
  for (std::size_t e = 0; e < cfg.sgd.epochs; ++e) {
    const double loss = train_epoch(net, train, cfg.sgd, e);
    const double err = evaluate(net, valid).error_rate;
    out.history.push_back({e + 1, loss, err});
    if (err < out.best_valid_error - cfg.min_delta) {
      out.best_valid_error = err;
      out.best_epoch = e + 1;
      out.net = net;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (on_epoch) on_epoch("finetune", e + 1);
    if (since_best >= cfg.patience) break;
  }
  return out;
}

Matrix predict_rows(const SupervisedNet& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw ShapeError("predict: input has length " + std::to_string(x.cols()) +
                     ", network expects " + std::to_string(net.input_dim()));
  }
  return std::move(forward_rows(net.layers, x).back());
}

Vector predict(const SupervisedNet& net, std::span<const double> x) {
  const Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const Matrix out = predict_rows(net, in);
  return Vector(std::vector<double>(out.span().begin(), out.span().end()));
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::size_t classify(const SupervisedNet& net, std::span<const double> x) {
  return argmax(predict(net, x));
}

Evaluation tally(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                 std::size_t n_classes) {
  if (truth.empty()) throw ArgumentError("evaluate: empty data set");
  if (truth.size() != predicted.size()) throw ShapeError("evaluate: prediction count mismatch");
  Evaluation ev{0.0, std::vector<std::vector<std::size_t>>(n_classes,
                                                           std::vector<std::size_t>(n_classes)),
                truth.size()};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || predicted[i] >= n_classes) {
      throw ArgumentError("evaluate: class index out of range");
    }
    ++ev.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  ev.error_rate = 1.0 - static_cast<double>(correct) / static_cast<double>(truth.size());
  return ev;
}

Evaluation evaluate(const SupervisedNet& net, const LabeledSet& data) {
  if (data.size() == 0) throw ArgumentError("evaluate: empty data set");
  data.validate();
  std::vector<std::size_t> predicted;
  predicted.reserve(data.size());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t stop = std::min(data.size(), start + kEvalChunk);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Matrix probs = predict_rows(net, gather_rows(data.inputs, rows));
    for (std::size_t r = 0; r < probs.rows(); ++r) predicted.push_back(argmax(probs.row(r)));
  }
  return tally(data.labels, predicted, std::max(data.n_classes, net.n_classes()));
}

}  // namespace sdae
