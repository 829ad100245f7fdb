#include "sdae/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdae/error.hpp"

namespace sdae {
namespace {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) return;
  const double peak = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - peak);
    total += x;
  }
  for (double& x : v) x /= total;
}

void activate_inplace(Activation kind, std::span<double> v) {
  switch (kind) {
    case Activation::Sigmoid:
      for (double& x : v) x = sigmoid(x);
      return;
    case Activation::Tanh:
      for (double& x : v) x = std::tanh(x);
      return;
    case Activation::Relu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      return;
    case Activation::Softmax:
      softmax_inplace(v);
      return;
    case Activation::Linear:
      return;
  }
}

// Multiplies `delta` in place by the activation derivative at `out`.
void apply_derivative(Activation kind, std::span<const double> out, std::span<double> delta) {
  switch (kind) {
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= out[i] * (1.0 - out[i]);
      return;
    case Activation::Tanh:
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - out[i] * out[i];
      return;
    case Activation::Relu:
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (!(out[i] > 0.0)) delta[i] = 0.0;
      return;
    case Activation::Linear:
      return;
    case Activation::Softmax:
      throw ContractError(
          "softmax has no elementwise derivative; use the fused softmax-NLL gradient");
  }
}

double clamp_prob(double p) noexcept { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

void check_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
}

Activation required_output(Loss loss) {
  switch (loss) {
    case Loss::SoftmaxNll: return Activation::Softmax;
    case Loss::CrossEntropyRecon: return Activation::Sigmoid;
    case Loss::SquaredErrorRecon: return Activation::Linear;
  }
  return Activation::Linear;
}

const char* loss_name(Loss loss) {
  switch (loss) {
    case Loss::SoftmaxNll: return "softmax-NLL";
    case Loss::CrossEntropyRecon: return "cross-entropy reconstruction";
    case Loss::SquaredErrorRecon: return "squared-error reconstruction";
  }
  return "?";
}

void check_net(std::span<const DenseLayer> net, std::size_t input_dim, Loss loss) {
  if (net.empty()) throw ArgumentError("backprop: empty network");
  std::size_t dim = input_dim;
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (net[l].inputs() != dim) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(net[l].inputs()) + " inputs, got " + std::to_string(dim));
    }
    if (net[l].activation == Activation::Softmax && l + 1 != net.size()) {
      throw ContractError("softmax is only legal on the output layer");
    }
    dim = net[l].outputs();
  }
  if (net.back().activation != required_output(loss)) {
    throw ContractError(std::string("loss ") + loss_name(loss) + " cannot follow a " +
                        std::string(to_string(net.back().activation)) + " output layer");
  }
}

void check_grads(std::span<const DenseLayer> net, std::span<const LayerGrads> grads) {
  if (grads.size() != net.size()) throw ShapeError("gradient count does not match layer count");
  for (std::size_t l = 0; l < net.size(); ++l) {
    if (grads[l].weights.rows() != net[l].weights.rows() ||
        grads[l].weights.cols() != net[l].weights.cols() ||
        grads[l].bias.size() != net[l].bias.size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(l));
    }
  }
}

// Shared tail of both batch forms: `delta` holds the output-layer deltas.
void backward(std::span<const DenseLayer> net, const Matrix& inputs,
              const std::vector<Matrix>& acts, Matrix delta, std::span<LayerGrads> grads) {
  for (std::size_t l = net.size(); l-- > 0;) {
    const Matrix& below = l == 0 ? inputs : acts[l - 1];
    auto& g = grads[l];
    for (std::size_t b = 0; b < delta.rows(); ++b) {
      const auto d = delta.row(b);
      const auto a = below.row(b);
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (d[j] != 0.0) axpy(d[j], a, g.weights.row(j));
        g.bias[j] += d[j];
      }
    }
    if (l == 0) break;
    Matrix prev(delta.rows(), net[l].inputs());
    const Vector zero(net[l].inputs());
    affine_rows_transposed(net[l].weights, zero, delta, prev);
    for (std::size_t b = 0; b < prev.rows(); ++b) {
      apply_derivative(net[l - 1].activation, acts[l - 1].row(b), prev.row(b));
    }
    delta = std::move(prev);
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
    case Activation::Linear: return "linear";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu, Activation::Softmax,
                 Activation::Linear}) {
    if (name == to_string(a)) return a;
  }
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

Vector activate(Activation kind, std::span<const double> pre) {
  std::vector<double> out(pre.begin(), pre.end());
  activate_inplace(kind, out);
  return Vector(std::move(out));
}

void activate_rows(Activation kind, Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) activate_inplace(kind, m.row(r));
}

Vector activate_grad(Activation kind, std::span<const double> out) {
  std::vector<double> g(out.size(), 1.0);
  apply_derivative(kind, out, g);
  return Vector(std::move(g));
}

void DenseLayer::validate() const {
  if (weights.rows() != bias.size()) {
    throw ShapeError("dense layer: " + std::to_string(weights.rows()) + " weight rows but bias of " +
                     std::to_string(bias.size()));
  }
  if (!weights.all_finite() || !bias.all_finite()) {
    throw NumericError("dense layer holds a non-finite parameter");
  }
}

double init_half_width(Activation kind, std::size_t fan_in, std::size_t fan_out) {
  const double base = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return kind == Activation::Sigmoid ? 4.0 * base : base;
}

DenseLayer make_dense(std::size_t inputs, std::size_t outputs, Activation kind, Rng& rng) {
  if (inputs == 0 || outputs == 0) throw ArgumentError("dense layer dimensions must be positive");
  const double r = init_half_width(kind, inputs, outputs);
  Matrix w(outputs, inputs);
  for (double& x : w.span()) x = rng.uniform(-r, r);
  return DenseLayer{std::move(w), Vector(outputs), kind};
}

AffineOutput affine_forward(const DenseLayer& layer, std::span<const double> input) {
  if (input.size() != layer.inputs()) {
    throw ShapeError("affine_forward: layer expects " + std::to_string(layer.inputs()) +
                     " inputs, got " + std::to_string(input.size()));
  }
  const Matrix in(1, input.size(), std::vector<double>(input.begin(), input.end()));
  Matrix pre;
  affine_rows(layer.weights, layer.bias, in, pre);
  Vector p(std::vector<double>(pre.span().begin(), pre.span().end()));
  Vector out = activate(layer.activation, p);
  return {std::move(p), std::move(out)};
}

double cross_entropy_recon(std::span<const double> x, std::span<const double> z) {
  check_same_length(x, z, "cross_entropy_recon");
  double loss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double zk = clamp_prob(z[k]);
    loss -= x[k] * std::log(zk) + (1.0 - x[k]) * std::log(1.0 - zk);
  }
  return loss;
}

double squared_error_recon(std::span<const double> x, std::span<const double> z) {
  check_same_length(x, z, "squared_error_recon");
  double loss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    loss += 0.5 * d * d;
  }
  return loss;
}

double nll_loss(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw ArgumentError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], kProbFloor));
}

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning_rate must be a finite non-negative number");
  }
  if (batch_size == 0) throw ArgumentError("batch_size must be at least 1");
}

std::vector<LayerGrads> zero_grads(std::span<const DenseLayer> layers) {
  std::vector<LayerGrads> g;
  g.reserve(layers.size());
  for (const auto& l : layers) {
    g.push_back({Matrix(l.weights.rows(), l.weights.cols()), Vector(l.bias.size())});
  }
  return g;
}

void sgd_step(std::span<DenseLayer> layers, std::span<const LayerGrads> grads,
              const SgdConfig& cfg) {
  check_grads(layers, grads);
  const double lr = cfg.learning_rate;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    axpy(-lr, grads[l].weights.span(), layers[l].weights.span());
    axpy(-lr, grads[l].bias.span(), layers[l].bias.span());
  }
}

void scale_grads(std::span<LayerGrads> grads, double factor) {
  for (auto& g : grads) {
    for (double& x : g.weights.span()) x *= factor;
    for (double& x : g.bias) x *= factor;
  }
}

std::vector<Matrix> forward_rows(std::span<const DenseLayer> net, const Matrix& inputs) {
  std::vector<Matrix> acts(net.size());
  const Matrix* in = &inputs;
  for (std::size_t l = 0; l < net.size(); ++l) {
    affine_rows(net[l].weights, net[l].bias, *in, acts[l]);
    activate_rows(net[l].activation, acts[l]);
    in = &acts[l];
  }
  return acts;
}

double backprop_batch(std::span<const DenseLayer> net, const Matrix& inputs,
                      std::span<const std::size_t> labels, std::span<LayerGrads> grads) {
  check_net(net, inputs.cols(), Loss::SoftmaxNll);
  check_grads(net, grads);
  if (labels.size() != inputs.rows()) throw ShapeError("one label per input row required");
  auto acts = forward_rows(net, inputs);
  Matrix delta = acts.back();
  double loss = 0.0;
  for (std::size_t b = 0; b < delta.rows(); ++b) {
    auto probs = delta.row(b);
    loss += nll_loss(probs, labels[b]);
    probs[labels[b]] -= 1.0;
  }
  backward(net, inputs, acts, std::move(delta), grads);
  return loss;
}

double backprop_batch(std::span<const DenseLayer> net, const Matrix& inputs,
                      const Matrix& targets, Loss loss, std::span<LayerGrads> grads) {
  if (loss == Loss::SoftmaxNll) {
    throw ContractError("softmax-NLL takes class labels, not a target matrix");
  }
  check_net(net, inputs.cols(), loss);
  check_grads(net, grads);
  auto acts = forward_rows(net, inputs);
  if (targets.rows() != inputs.rows() || targets.cols() != acts.back().cols()) {
    throw ShapeError("reconstruction targets do not match network output");
  }
  Matrix delta = acts.back();
  double total = 0.0;
  for (std::size_t b = 0; b < delta.rows(); ++b) {
    total += loss == Loss::CrossEntropyRecon ? cross_entropy_recon(targets.row(b), delta.row(b))
                                             : squared_error_recon(targets.row(b), delta.row(b));
    axpy(-1.0, targets.row(b), delta.row(b));
  }
  backward(net, inputs, acts, std::move(delta), grads);
  return total;
}

Gradients backprop(std::span<const DenseLayer> net, std::span<const double> input,
                   const Target& target, Loss loss) {
  const Matrix in(1, input.size(), std::vector<double>(input.begin(), input.end()));
  Gradients out{0.0, zero_grads(net)};
  if (const auto* label = std::get_if<std::size_t>(&target)) {
    if (loss != Loss::SoftmaxNll) throw ContractError("class label given for a reconstruction loss");
    const std::size_t labels[1] = {*label};
    out.loss = backprop_batch(net, in, labels, out.layers);
  } else {
    const auto& t = std::get<Vector>(target);
    const Matrix tm(1, t.size(), t.values());
    out.loss = backprop_batch(net, in, tm, loss, out.layers);
  }
  return out;
}

}  // namespace sdae
